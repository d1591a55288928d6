import argparse

# Import commands
from cad.commands.preprocess import PreprocessCommand
from cad.commands.enhance import EnhanceCommand
from cad.commands.features import FeaturesCommand
from cad.commands.train import TrainCommand
from cad.commands.report import ReportCommand
from cad.commands.experiment import ExperimentCommand
from cad.commands.phantoms import PhantomsCommand


def add_command(subparsers, command_cls):
    command = command_cls()
    parser = subparsers.add_parser(command.name, help=command.help, description=command.__doc__)
    command.add_arguments(parser)
    parser.set_defaults(handler=command)
    return parser


def create_cli():
    """Initialize the command line parser"""
    parser = argparse.ArgumentParser(
        prog="cad",
        description="Retinal image enhancement, feature extraction and glaucoma classification",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    subparsers = parser.add_subparsers(dest="command", required=True)

    # Register per-stage commands
    add_command(subparsers, PreprocessCommand)
    add_command(subparsers, EnhanceCommand)
    add_command(subparsers, FeaturesCommand)
    add_command(subparsers, TrainCommand)
    add_command(subparsers, ReportCommand)

    # Register end-to-end and data commands
    add_command(subparsers, ExperimentCommand)
    add_command(subparsers, PhantomsCommand)

    return parser
