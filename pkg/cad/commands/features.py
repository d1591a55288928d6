import logging
from pathlib import Path

from cad.commands import Command, add_run_options
from cad.config import DEBUG_DIR, load_config
from cad.utils import image_id, list_images, success_response
from retina.constants import STAGES
from retina.errors import InputError
from retina.graphfeat import path_overlay
from retina.imagecore import load_image, save_image
from retina.pipeline import extract_features, ingest, map_images
from retina.records import records_to_frame, write_feature_file

logger = logging.getLogger(__name__)


class FeaturesCommand(Command):
    """55-value feature records of every image in a directory"""
    name = "features"
    help = "extract statistical and graph features"

    def add_arguments(self, parser):
        parser.add_argument("--in", dest="in_dir", required=True, help="image directory")
        parser.add_argument("--out", dest="out_file", required=True, help="feature file to write")
        parser.add_argument("--manifest", help="path,label,dataset CSV giving labels by image id")
        parser.add_argument("--stage", choices=STAGES, default="enhanced",
                            help="stage the input images come from")
        parser.add_argument("--debug", action="store_true", help="write GSP path overlays")
        add_run_options(parser)

    def run(self, args):
        cfg = load_config(args.config, args.workers)
        labels = {}
        if args.manifest:
            manifest = ingest(None, args.manifest, check_images=False)
            labels = {e.image_id: (e.label, e.dataset) for e in manifest.entries}
        debug_dir = Path(args.out_file).parent / DEBUG_DIR

        def one(path):
            ident = image_id(path, args.in_dir)
            if labels and ident not in labels:
                raise InputError(f"image {ident} has no row in {args.manifest}")
            label, dataset = labels.get(ident, ("", ""))
            img = load_image(path, cfg.max_side)
            if args.debug:
                debug_dir.mkdir(parents=True, exist_ok=True)
                save_image(path_overlay(img, cfg.feat.gsp), debug_dir / f"{ident.replace('/', '_')}_gsp.png")
            return extract_features(img, cfg.feat, ident, args.stage, label, dataset)

        records = map_images(one, list_images(args.in_dir), cfg.workers)
        write_feature_file(records_to_frame(records), args.out_file)
        return success_response(
            {"records": len(records), "out": str(args.out_file)},
            f"Extracted features of {len(records)} images",
        )
