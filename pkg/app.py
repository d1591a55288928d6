import logging
import sys

from cad import create_cli
from cad.config import LOG_FORMAT
from cad.utils import error_response, exit_code_for
from retina.errors import CadError


def main(argv=None):
    parser = create_cli()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format=LOG_FORMAT,
        force=True,
    )

    try:
        return args.handler.run(args)
    except (CadError, OSError, ValueError, ArithmeticError) as e:
        return error_response(str(e), exit_code_for(e))


if __name__ == "__main__":
    sys.exit(main())
