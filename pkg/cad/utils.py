import json
import logging
from pathlib import Path

from cad.config import DEBUG_DIR, IMAGE_SUFFIXES
from retina.errors import InputError, NumericError

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_NUMERIC = 2


def success_response(data=None, message="Success"):
    """Standard success summary for a command"""
    response = {
        'status': 'success',
        'message': message
    }
    if data is not None:
        response['data'] = data

    logger.info(message)
    print(json.dumps(response, indent=2, sort_keys=True, default=str))
    return EXIT_OK


def error_response(message="An error occurred", status_code=EXIT_INPUT):
    """Standard error report for a command"""
    logger.error(message)
    return status_code


def exit_code_for(error):
    """Map an exception to the process exit code"""
    if isinstance(error, (NumericError, ArithmeticError)):
        return EXIT_NUMERIC
    return EXIT_INPUT


def list_images(in_dir):
    """Image files under a directory, sorted by relative path, skipping debug dumps"""
    in_dir = Path(in_dir)
    if not in_dir.is_dir():
        raise InputError(f"input directory not found: {in_dir}")
    images = sorted(
        p for p in in_dir.rglob("*")
        if p.is_file() and p.suffix.lower() in IMAGE_SUFFIXES
        and DEBUG_DIR not in p.relative_to(in_dir).parts
    )
    if not images:
        raise InputError(f"no images found in {in_dir}")
    return images


def image_id(path, in_dir):
    return Path(path).relative_to(in_dir).with_suffix("").as_posix()


def output_path(path, in_dir, out_dir, suffix=".png"):
    """Mirror an input image's relative location under the output directory"""
    target = Path(out_dir) / Path(path).relative_to(in_dir).with_suffix(suffix)
    target.parent.mkdir(parents=True, exist_ok=True)
    return target
