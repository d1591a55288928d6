"""Dataset ingestion, stage orchestration, feature records and experiments."""
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
import pandas as pd

from retina import visualization
from retina.constants import (
    EPOCH_CHECKPOINTS,
    FEATURE_COUNT,
    FEATURE_NAMES,
    LABELS,
    POSITIVE_LABEL,
    PRESET_GRID,
    STAGES,
)
from retina.enhance import EnhanceConfig, enhance_with_report
from retina.errors import InputError, NumericError
from retina.graphfeat import GspConfig, LgsConfig, graph_features
from retina.imagecore import histogram_equalize, load_image, mse
from retina.neural import (
    TrainConfig,
    activation_sweep,
    error_grid,
    evaluate,
    split_dataset,
)
from retina.preprocess import PreprocessConfig, preprocess
from retina.records import records_to_frame, write_feature_file, write_table
from retina.statfeat import GlcmConfig, HocConfig, statistical_features

logger = logging.getLogger(__name__)

MANIFEST_COLUMNS = ["path", "label", "dataset"]
REGIMES = ("before", "after")


@dataclass
class ManifestEntry:
    path: Path
    label: str
    dataset: str
    image_id: str

    @property
    def target(self):
        return int(self.label == POSITIVE_LABEL)


@dataclass
class DatasetManifest:
    """Validated (image, label, dataset) rows"""
    entries: list

    @property
    def counts(self):
        return {label: sum(e.label == label for e in self.entries) for label in LABELS}

    def __len__(self):
        return len(self.entries)


def ingest(root_dir, manifest_path, check_images=True):
    """Read a ``path,label,dataset`` manifest and validate every row"""
    manifest_path = Path(manifest_path)
    if not manifest_path.exists():
        raise InputError(f"manifest not found: {manifest_path}")
    root = Path(root_dir) if root_dir else manifest_path.parent

    df = pd.read_csv(manifest_path, dtype=str, keep_default_na=False)
    missing = [c for c in MANIFEST_COLUMNS if c not in df.columns]
    if missing:
        raise InputError(f"{manifest_path}: missing columns {missing}")

    entries, seen = [], set()
    for row_no, row in enumerate(df.itertuples(index=False), start=2):
        label = row.label.strip().lower()
        if label not in LABELS:
            raise InputError(f"{manifest_path} row {row_no}: unknown label {row.label!r}")
        path = root / row.path
        if not path.exists():
            raise InputError(f"{manifest_path} row {row_no}: image not found {path}")
        if check_images:
            load_image(path)
        image_id = Path(row.path).with_suffix("").as_posix()
        if image_id in seen:
            raise InputError(f"{manifest_path} row {row_no}: duplicate image {image_id}")
        seen.add(image_id)
        entries.append(ManifestEntry(path=path, label=label, dataset=row.dataset or "-", image_id=image_id))

    manifest = DatasetManifest(entries)
    logger.info("Ingested %d images %s", len(manifest), manifest.counts)
    return manifest


@dataclass(frozen=True)
class FeatureConfig:
    glcm: GlcmConfig = field(default_factory=GlcmConfig)
    hoc: HocConfig = field(default_factory=HocConfig)
    hos_nfft: int = 64
    lgs: LgsConfig = field(default_factory=LgsConfig)
    gsp: GspConfig = field(default_factory=GspConfig)

    def __post_init__(self):
        if int(self.hos_nfft) != self.hos_nfft or self.hos_nfft < 4:
            raise InputError(f"feat.hos_nfft must be >= 4, got {self.hos_nfft}")


@dataclass
class FeatureRecord:
    """One image's 55-value feature vector in the frozen column order"""
    image_id: str
    stage: str
    vector: np.ndarray
    label: str = ""
    dataset: str = ""

    def __post_init__(self):
        if self.stage not in STAGES:
            raise InputError(f"unknown stage {self.stage!r}, expected one of {STAGES}")
        self.vector = np.asarray(self.vector, dtype=np.float64)
        if self.vector.shape != (FEATURE_COUNT,):
            raise InputError(f"feature vector must hold {FEATURE_COUNT} values, got {self.vector.shape}")
        if not np.all(np.isfinite(self.vector)):
            raise NumericError(f"non-finite feature values for {self.image_id}")


def extract_features(img_enh, cfg=None, image_id="", stage="enhanced", label="", dataset=""):
    cfg = cfg or FeatureConfig()
    try:
        feats = statistical_features(img_enh, cfg.glcm, cfg.hoc, cfg.hos_nfft)
        feats.update(graph_features(img_enh, cfg.lgs, cfg.gsp))
    except (InputError, NumericError) as e:
        raise type(e)(f"feature extraction failed for {image_id or 'image'}: {e}") from e
    vector = [feats[name] for name in FEATURE_NAMES]
    return FeatureRecord(image_id=image_id, stage=stage, vector=vector, label=label, dataset=dataset)


@dataclass(frozen=True)
class PipelineConfig:
    pre: PreprocessConfig = field(default_factory=PreprocessConfig)
    enh: EnhanceConfig = field(default_factory=EnhanceConfig)
    feat: FeatureConfig = field(default_factory=FeatureConfig)
    train: TrainConfig = field(default_factory=TrainConfig)
    workers: int = 4
    max_side: int | None = None

    def __post_init__(self):
        if int(self.workers) != self.workers or self.workers < 1:
            raise InputError(f"run.workers must be >= 1, got {self.workers}")


@dataclass
class ImageResult:
    entry: ManifestEntry
    original: np.ndarray
    preprocessed: np.ndarray
    enhanced: np.ndarray
    t_final: int
    timings: dict


def process_image(entry, cfg):
    """Load, preprocess and enhance one manifest entry"""
    timings = {}
    start = time.perf_counter()
    original = load_image(entry.path, cfg.max_side)
    pre = preprocess(original, cfg.pre)
    timings["preprocess"] = time.perf_counter() - start

    start = time.perf_counter()
    enhanced, schedule = enhance_with_report(pre, cfg.enh)
    timings["enhance"] = time.perf_counter() - start
    logger.debug("%s: t_final=%d", entry.image_id, schedule.t_final)
    return ImageResult(entry, original, pre, enhanced, schedule.t_final, timings)


def map_images(func, items, workers):
    """Apply func over items with a bounded pool, keeping input order"""
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, items))


def features_for(results, cfg, stage):
    """Feature records of one image stage, sorted by image id"""
    def one(result):
        img = {"raw": result.original, "preprocessed": result.preprocessed,
               "enhanced": result.enhanced}[stage]
        e = result.entry
        return extract_features(img, cfg.feat, e.image_id, stage, e.label, e.dataset)

    records = map_images(one, results, cfg.workers)
    return sorted(records, key=lambda r: r.image_id)


def mse_rows(results):
    """Per-image MSE of each method's output against the original"""
    rows = []
    for r in sorted(results, key=lambda r: r.entry.image_id):
        rows.append({
            "image_id": r.entry.image_id,
            "dataset": r.entry.dataset,
            "mse_proposed": mse(r.enhanced, r.original),
            "mse_preprocessed": mse(r.preprocessed, r.original),
            "mse_he": mse(histogram_equalize(r.original), r.original),
        })
    return pd.DataFrame(rows)


@dataclass(frozen=True)
class ExperimentConfig:
    grid: tuple = PRESET_GRID
    checkpoints: tuple = EPOCH_CHECKPOINTS
    regimes: tuple = REGIMES
    sweep: bool = True

    def __post_init__(self):
        if not self.grid or not self.checkpoints:
            raise InputError("experiment grid and checkpoints must be non-empty")
        unknown = set(self.regimes) - set(REGIMES)
        if unknown:
            raise InputError(f"unknown regimes {sorted(unknown)}")


@dataclass
class RunReport:
    timings: dict
    mse_table: pd.DataFrame
    error_table: pd.DataFrame
    metric_table: pd.DataFrame
    sweep_table: pd.DataFrame
    curves: pd.DataFrame
    t_final: pd.DataFrame
    features: dict = field(default_factory=dict)
    trained: dict = field(default_factory=dict, repr=False)


@dataclass
class TrainingResult:
    data: object
    error_table: pd.DataFrame
    models: dict
    best: pd.DataFrame
    metric_table: pd.DataFrame
    curves: pd.DataFrame
    sweep_table: pd.DataFrame


def records_xy(records):
    x = np.stack([r.vector for r in records])
    y = np.array([int(r.label == POSITIVE_LABEL) for r in records])
    return x, y, [r.dataset for r in records]


def frame_xy(df):
    """Features, binary targets and dataset tags of a loaded feature file"""
    unknown = sorted(set(df["label"].fillna("")) - set(LABELS))
    if unknown:
        raise InputError(f"feature file holds rows without a known label: {unknown}")
    x = df[list(FEATURE_NAMES)].to_numpy(dtype=np.float64)
    y = (df["label"] == POSITIVE_LABEL).to_numpy().astype(np.int64)
    return x, y, df["dataset"].fillna("-").astype(str).tolist()


def best_cells(error_table):
    """Grid cell with the lowest final validation error per model"""
    last = error_table[error_table["epoch"] == error_table["epoch"].max()]
    ranked = last.sort_values(["model", "v_error", "t_error", "HU"], kind="stable")
    return ranked.groupby("model", sort=True).head(1).reset_index(drop=True)


def metric_rows(models, data, datasets, regime, best):
    """Accuracy, sensitivity, specificity and confusion per model and dataset tag"""
    rows = []
    tags = np.asarray(datasets)[data.test_index]
    for cell in best.itertuples(index=False):
        model, _ = models[(cell.model.lower(), cell.HU, cell.BS)]
        groups = [("ALL", np.ones(len(tags), dtype=bool))]
        groups += [(tag, tags == tag) for tag in sorted(set(tags))]
        for tag, mask in groups:
            m = evaluate(model, data.x_test[mask], data.y_test[mask])
            rows.append({"model": cell.model, "regime": regime, "dataset": tag,
                         "HU": cell.HU, "BS": cell.BS, **m.as_row()})
    return pd.DataFrame(rows)


def _curves(models, best, regime):
    frames = []
    for cell in best.itertuples(index=False):
        _, history = models[(cell.model.lower(), cell.HU, cell.BS)]
        df = pd.DataFrame([asdict(rec) for rec in history])
        df.insert(0, "model", cell.model)
        df.insert(1, "regime", regime)
        frames.append(df)
    return pd.concat(frames, ignore_index=True)


def train_regime(x, y, datasets, cfg, exp, regime, sweep=False):
    """Split one feature set, train the grid and tabulate the best cells"""
    data = split_dataset(x, y, cfg.train.split, cfg.train.seed)
    table, models = error_grid(data, cfg.train, exp.grid, exp.checkpoints, cfg.workers)
    table.insert(0, "regime", regime)
    best = best_cells(table)
    sweep_table = pd.DataFrame()
    if sweep:
        sweep_table = activation_sweep(data, cfg.train, cfg.workers)
        sweep_table.insert(0, "regime", regime)
    return TrainingResult(
        data=data,
        error_table=table,
        models=models,
        best=best,
        metric_table=metric_rows(models, data, datasets, regime, best),
        curves=_curves(models, best, regime),
        sweep_table=sweep_table,
    )


def run_experiment(manifest, cfg=None, exp=None):
    """Process every image, extract both regimes' features and train the grid"""
    cfg = cfg or PipelineConfig()
    exp = exp or ExperimentConfig()
    if min(manifest.counts.values()) < 2:
        raise InputError(f"each class needs at least 2 samples, got {manifest.counts}")

    timings = {}
    start = time.perf_counter()
    results = map_images(lambda e: process_image(e, cfg), manifest.entries, cfg.workers)
    timings["images"] = time.perf_counter() - start

    stage_of = {"before": "raw", "after": "enhanced"}
    features, trained = {}, {}
    for regime in exp.regimes:
        start = time.perf_counter()
        records = features_for(results, cfg, stage_of[regime])
        features[regime] = records
        timings[f"features_{regime}"] = time.perf_counter() - start

        start = time.perf_counter()
        x, y, datasets = records_xy(records)
        sweep = exp.sweep and regime == exp.regimes[-1]
        trained[regime] = train_regime(x, y, datasets, cfg, exp, regime, sweep)
        timings[f"train_{regime}"] = time.perf_counter() - start
        logger.info("Regime %s trained in %.1fs", regime, timings[f"train_{regime}"])

    t_final = pd.DataFrame(
        sorted(((r.entry.image_id, r.t_final) for r in results)), columns=["image_id", "t_final"]
    )
    parts = list(trained.values())
    return RunReport(
        timings=timings,
        mse_table=mse_rows(results),
        error_table=pd.concat([t.error_table for t in parts], ignore_index=True),
        metric_table=pd.concat([t.metric_table for t in parts], ignore_index=True),
        sweep_table=pd.concat([t.sweep_table for t in parts], ignore_index=True),
        curves=pd.concat([t.curves for t in parts], ignore_index=True),
        t_final=t_final,
        features=features,
        trained=trained,
    )


def write_report(report, out_dir):
    """Save every report table, the feature files and the figures"""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for regime, records in report.features.items():
        write_feature_file(records_to_frame(records), out_dir / f"features_{regime}.csv")
    write_table(report.mse_table, out_dir / "mse.csv")
    write_table(report.error_table, out_dir / "error_grid.csv")
    write_table(report.metric_table, out_dir / "metrics.csv")
    write_table(report.curves, out_dir / "curves.csv")
    write_table(report.t_final, out_dir / "t_final.csv")
    if not report.sweep_table.empty:
        write_table(report.sweep_table, out_dir / "activation_sweep.csv")
    # Only file that differs between identical runs
    write_table(pd.DataFrame(sorted(report.timings.items()), columns=["stage", "seconds"]),
                out_dir / "timings.csv")
    write_plots(out_dir)
    return out_dir


def write_plots(run_dir):
    """Render the HTML figures from the report tables of a run directory"""
    run_dir = Path(run_dir)
    figures = {
        "mse_histogram.html": ("mse.csv", visualization.create_mse_histogram),
        "error_curves.html": ("curves.csv", visualization.create_error_curves),
        "regime_accuracy.html": ("metrics.csv", visualization.create_regime_bars),
    }
    written = []
    for name, (table, make) in figures.items():
        if (run_dir / table).exists():
            visualization.write_figure(make(pd.read_csv(run_dir / table)), run_dir / name)
            written.append(run_dir / name)
    if (run_dir / "t_final.csv").exists():
        t_final = pd.read_csv(run_dir / "t_final.csv")["t_final"]
        visualization.write_figure(visualization.create_t_final_chart(t_final), run_dir / "t_final.html")
        written.append(run_dir / "t_final.html")
    return written
