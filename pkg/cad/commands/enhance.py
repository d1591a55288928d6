import logging
from pathlib import Path

from cad.commands import Command, add_run_options
from cad.config import DEBUG_DIR, SIDECAR_SUFFIX, load_config
from cad.utils import image_id, list_images, output_path, success_response
from retina.enhance import enhance_with_report
from retina.imagecore import load_image, save_image
from retina.pipeline import map_images
from retina.records import write_sidecar
from retina.xforms import dtcwt_forward, dump_pyramid

logger = logging.getLogger(__name__)


class EnhanceCommand(Command):
    """DTCWT denoising and dynamic top-hat enhancement of preprocessed images"""
    name = "enhance"
    help = "denoise and enhance preprocessed images"

    def add_arguments(self, parser):
        parser.add_argument("--in", dest="in_dir", required=True, help="preprocessed image directory")
        parser.add_argument("--out", dest="out_dir", required=True, help="output directory")
        parser.add_argument("--debug", action="store_true", help="dump DTCWT sub-band images")
        add_run_options(parser)

    def run(self, args):
        cfg = load_config(args.config, args.workers)
        debug_dir = Path(args.out_dir) / DEBUG_DIR

        def one(path):
            img = load_image(path, cfg.max_side)
            out, schedule = enhance_with_report(img, cfg.enh)
            target = output_path(path, args.in_dir, args.out_dir)
            save_image(out, target)
            ident = image_id(path, args.in_dir)
            write_sidecar(target.with_suffix(SIDECAR_SUFFIX), {
                "image_id": ident,
                "t_final": schedule.t_final,
                "ed_reference": schedule.ed_reference,
                "ed_trace": list(schedule.ed_trace),
            })
            if args.debug:
                dump_pyramid(dtcwt_forward(img, cfg.enh.levels), debug_dir, ident.replace("/", "_"))
            return schedule.t_final

        t_final = map_images(one, list_images(args.in_dir), cfg.workers)
        return success_response(
            {"images": len(t_final), "t_final_max": max(t_final), "out": str(args.out_dir)},
            f"Enhanced {len(t_final)} images",
        )
