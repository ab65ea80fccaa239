"""Command handlers."""
from dripp.commands.handlers.binarize import binarize_activations
from dripp.commands.handlers.evaluate import evaluate
from dripp.commands.handlers.experiment import experiment
from dripp.commands.handlers.fit import fit
from dripp.commands.handlers.show_config import show_config
from dripp.commands.handlers.simulate import simulate
from dripp.commands.handlers.sweep import sweep
from dripp.commands.handlers.ttest import ttest

__all__ = [
    "binarize_activations",
    "evaluate",
    "experiment",
    "fit",
    "show_config",
    "simulate",
    "sweep",
    "ttest",
]
