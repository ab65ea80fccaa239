"""Binarize command handler."""
from dripp.commands.utils import handle_command_errors
from dripp.services.binarizer import AbsoluteThreshold, PercentileThreshold, binarize
from dripp.services.event_io import read_activations, write_events


@handle_command_errors
def binarize_activations(config_path, args):
    """Threshold an activation stream into an events file."""
    stream = read_activations(args.activations)
    if args.percentile is not None:
        rule = PercentileThreshold(args.percentile)
    else:
        rule = AbsoluteThreshold(args.threshold)

    events = binarize(stream, rule, args.duration)
    path = write_events(events, args.out)

    print(f"Binarized {stream.label}: kept {events.count} of {len(stream)} samples ({rule})")
    print(f"Events saved to: {path}")
