import logging

from cad.commands import Command, add_run_options
from cad.config import load_config, parse_grid
from cad.utils import success_response
from retina.pipeline import ExperimentConfig, ingest, run_experiment, write_report

logger = logging.getLogger(__name__)


class ExperimentCommand(Command):
    """Full run: preprocess, enhance, features for both regimes, training and report"""
    name = "experiment"
    help = "run the whole pipeline from a manifest"

    def add_arguments(self, parser):
        parser.add_argument("--manifest", required=True, help="path,label,dataset CSV")
        parser.add_argument("--root", help="directory manifest paths are relative to")
        parser.add_argument("--out", dest="out_dir", required=True, help="run directory")
        parser.add_argument("--grid", choices=("preset", "custom"), default="preset")
        parser.add_argument("--cells", help="custom grid cells, e.g. 5x113,10x56")
        parser.add_argument("--no-sweep", action="store_true", help="skip the activation sweep")
        add_run_options(parser, seed=True)

    def run(self, args):
        cfg = load_config(args.config, args.workers, args.seed)
        exp = ExperimentConfig(grid=parse_grid(args.grid, args.cells), sweep=not args.no_sweep)
        manifest = ingest(args.root, args.manifest)
        report = run_experiment(manifest, cfg, exp)
        write_report(report, args.out_dir)

        overall = report.metric_table[report.metric_table["dataset"] == "ALL"]
        return success_response(
            {f"{row.model}/{row.regime}": round(row.accuracy, 2) for row in overall.itertuples(index=False)},
            f"Experiment on {len(manifest)} images written to {args.out_dir}",
        )
