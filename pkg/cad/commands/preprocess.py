import logging
from dataclasses import replace

from cad.commands import Command, add_run_options
from cad.config import SIDECAR_SUFFIX, load_config
from cad.utils import image_id, list_images, output_path, success_response
from retina.imagecore import load_image, mse, save_image
from retina.pipeline import map_images
from retina.preprocess import preprocess, select_alpha
from retina.records import write_sidecar

logger = logging.getLogger(__name__)


class PreprocessCommand(Command):
    """Brightness and contrast correction of every image in a directory"""
    name = "preprocess"
    help = "correct brightness and contrast of input images"

    def add_arguments(self, parser):
        parser.add_argument("--in", dest="in_dir", required=True, help="input image directory")
        parser.add_argument("--out", dest="out_dir", required=True, help="output directory")
        add_run_options(parser)

    def run(self, args):
        cfg = load_config(args.config, args.workers)

        def one(path):
            img = load_image(path, cfg.max_side)
            alpha = cfg.pre.alpha if cfg.pre.alpha is not None else select_alpha(img, cfg.pre)
            out = preprocess(img, replace(cfg.pre, alpha=alpha))
            target = output_path(path, args.in_dir, args.out_dir)
            save_image(out, target)
            write_sidecar(target.with_suffix(SIDECAR_SUFFIX), {
                "image_id": image_id(path, args.in_dir),
                "alpha": alpha,
                "mse": mse(out, img),
            })
            return target

        written = map_images(one, list_images(args.in_dir), cfg.workers)
        return success_response(
            {"images": len(written), "out": str(args.out_dir)},
            f"Preprocessed {len(written)} images",
        )
