from pathlib import Path

from cad.commands import Command
from cad.utils import success_response
from retina.errors import InputError
from retina.pipeline import write_plots
from retina.records import read_table


class ReportCommand(Command):
    """Re-render the figures of a run and summarize its metrics"""
    name = "report"
    help = "render plots and summarize a run directory"

    def add_arguments(self, parser):
        parser.add_argument("--run", dest="run_dir", required=True, help="run directory")

    def run(self, args):
        run_dir = Path(args.run_dir)
        if not run_dir.is_dir():
            raise InputError(f"run directory not found: {run_dir}")
        written = write_plots(run_dir)
        if not written:
            raise InputError(f"no report tables in {run_dir}")

        summary = {"figures": [p.name for p in written]}
        if (run_dir / "metrics.csv").exists():
            metrics = read_table(run_dir / "metrics.csv")
            overall = metrics[metrics["dataset"] == "ALL"]
            summary["accuracy"] = {
                f"{row.model}/{row.regime}": round(row.accuracy, 2)
                for row in overall.itertuples(index=False)
            }
        if (run_dir / "mse.csv").exists():
            mse = read_table(run_dir / "mse.csv")
            summary["mean_mse"] = {c: float(mse[c].mean()) for c in mse.columns if c.startswith("mse_")}
        return success_response(summary, f"Rendered {len(written)} figures for {run_dir}")
