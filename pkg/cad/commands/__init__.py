from cad.config import DEFAULT_SEED


class Command:
    """One ``cad`` sub-command: its arguments and its handler"""
    name = ""
    help = ""

    def add_arguments(self, parser):
        pass

    def run(self, args):
        raise NotImplementedError


def add_run_options(parser, seed=False):
    parser.add_argument("--config", help="flat key = value config file")
    parser.add_argument("--workers", type=int, help="parallel image workers")
    if seed:
        parser.add_argument("--seed", type=int, help=f"split and weight seed (default {DEFAULT_SEED})")
