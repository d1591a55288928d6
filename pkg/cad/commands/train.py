import logging
from pathlib import Path

from cad.commands import Command, add_run_options
from cad.config import MODEL_DIR, load_config, parse_grid
from cad.utils import success_response
from retina.neural import save_model
from retina.pipeline import ExperimentConfig, frame_xy, train_regime, write_plots
from retina.records import read_feature_file, write_table

logger = logging.getLogger(__name__)


class TrainCommand(Command):
    """WNN and MLP training over the (hidden units, batch size) grid"""
    name = "train"
    help = "train classifiers on a feature file"

    def add_arguments(self, parser):
        parser.add_argument("--features", required=True, help="feature file from 'cad features'")
        parser.add_argument("--out", dest="out_dir", required=True, help="run directory")
        parser.add_argument("--grid", choices=("preset", "custom"), default="preset")
        parser.add_argument("--cells", help="custom grid cells, e.g. 5x113,10x56")
        parser.add_argument("--sweep", action="store_true", help="also run the activation sweep")
        add_run_options(parser, seed=True)

    def run(self, args):
        cfg = load_config(args.config, args.workers, args.seed)
        exp = ExperimentConfig(grid=parse_grid(args.grid, args.cells))
        df = read_feature_file(args.features)
        x, y, datasets = frame_xy(df)
        regime = "+".join(sorted(set(df["stage"])))

        result = train_regime(x, y, datasets, cfg, exp, regime, sweep=args.sweep)
        out_dir = Path(args.out_dir)
        write_table(result.error_table, out_dir / "error_grid.csv")
        write_table(result.metric_table, out_dir / "metrics.csv")
        write_table(result.curves, out_dir / "curves.csv")
        if args.sweep:
            write_table(result.sweep_table, out_dir / "activation_sweep.csv")

        model_dir = out_dir / MODEL_DIR
        model_dir.mkdir(parents=True, exist_ok=True)
        for cell in result.best.itertuples(index=False):
            model, _ = result.models[(cell.model.lower(), cell.HU, cell.BS)]
            save_model(model, model_dir / f"{cell.model.lower()}.npz")
        write_plots(out_dir)

        overall = result.metric_table[result.metric_table["dataset"] == "ALL"]
        return success_response(
            {row.model: {"HU": row.HU, "BS": row.BS, "accuracy": round(row.accuracy, 2)}
             for row in overall.itertuples(index=False)},
            f"Trained {len(exp.grid)} grid cells on {len(y)} records",
        )
