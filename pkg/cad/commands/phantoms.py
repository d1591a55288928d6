from cad.commands import Command
from cad.utils import success_response
from retina.errors import InputError
from retina.phantoms import write_phantom_set


class PhantomsCommand(Command):
    """Synthetic two-class texture image set with its manifest"""
    name = "phantoms"
    help = "write a synthetic phantom data set"

    def add_arguments(self, parser):
        parser.add_argument("--out", dest="out_dir", required=True, help="output directory")
        parser.add_argument("--count", type=int, default=200)
        parser.add_argument("--seed", type=int, default=0)
        parser.add_argument("--size", type=int, default=64)

    def run(self, args):
        if args.count < 4 or args.size < 16:
            raise InputError("phantom sets need --count >= 4 and --size >= 16")
        manifest = write_phantom_set(args.out_dir, args.count, args.seed, args.size)
        return success_response({"manifest": str(manifest), "images": args.count},
                                f"Wrote {args.count} phantoms")
