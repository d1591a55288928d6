# Configuration for the command line

from dataclasses import replace

from retina.enhance import EnhanceConfig
from retina.errors import InputError
from retina.graphfeat import GspConfig
from retina.neural import TrainConfig
from retina.pipeline import ExperimentConfig, FeatureConfig, PipelineConfig
from retina.preprocess import PreprocessConfig
from retina.statfeat import GlcmConfig, HocConfig
from retina.xforms import DenoiseConfig

# Image files picked up from input directories
IMAGE_SUFFIXES = (".png", ".jpg", ".jpeg", ".tif", ".tiff", ".bmp")

# Run defaults
DEFAULT_WORKERS = 4
DEFAULT_SEED = 0

# Output layout
SIDECAR_SUFFIX = ".json"
DEBUG_DIR = "debug"
MODEL_DIR = "models"

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


def _optional_float(text):
    return None if text.lower() in ("auto", "none") else float(text)


def _bool(text):
    value = text.lower()
    if value in ("1", "true", "yes", "on"):
        return True
    if value in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _optional_int(text):
    return None if text.lower() in ("none", "0") else int(text)


def _blocks(text):
    rows, _, cols = text.lower().partition("x")
    return (int(rows), int(cols or rows))


# key -> (section, field, parser)
CONFIG_KEYS = {
    "pre.alpha": ("pre", "alpha", _optional_float),
    "pre.delta": ("pre", "delta", float),
    "pre.theta": ("pre", "theta", float),
    "pre.quantiles": ("pre", "quantiles", int),
    "enh.k": ("enh", "k", float),
    "enh.diff_max": ("enh", "diff_max", float),
    "enh.se0": ("enh", "se0", str),
    "enh.t_cap": ("enh", "t_cap", int),
    "enh.window": ("enh", "window", int),
    "enh.levels": ("enh", "levels", int),
    "enh.denoise": ("denoise", "enabled", _bool),
    "enh.denoise_window": ("denoise", "window", int),
    "enh.denoise_beta": ("denoise", "beta", float),
    "enh.denoise_split": ("denoise", "split", str),
    "feat.glcm_levels": ("glcm", "levels", int),
    "feat.hoc_max_lag": ("hoc", "max_lag", int),
    "feat.hos_nfft": ("feat", "hos_nfft", int),
    "feat.gsp_blocks": ("gsp", "n_blocks", _blocks),
    "feat.gsp_te": ("gsp", "t_e", int),
    "train.epochs": ("train", "epochs", int),
    "train.learning_rate": ("train", "learning_rate", float),
    "train.l2": ("train", "l2", float),
    "train.activation": ("train", "activation", str),
    "train.seed": ("train", "seed", int),
    "run.workers": ("run", "workers", int),
    "run.max_side": ("run", "max_side", _optional_int),
}


def parse_config_lines(lines, source="<config>"):
    """Parse flat ``key = value`` lines into {section: {field: value}}"""
    sections = {}
    for line_no, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or not value:
            raise InputError(f"{source} line {line_no}: expected 'key = value', got {raw.strip()!r}")
        if key not in CONFIG_KEYS:
            raise InputError(f"{source} line {line_no}: unknown key {key!r}")
        section, name, parse = CONFIG_KEYS[key]
        try:
            sections.setdefault(section, {})[name] = parse(value)
        except ValueError as e:
            raise InputError(f"{source} line {line_no}: bad value for {key}: {e}") from e
    return sections


def build_config(sections=None, workers=None, seed=None):
    """Assemble a validated PipelineConfig from parsed sections"""
    sections = sections or {}

    def get(name):
        return sections.get(name, {})

    denoise = DenoiseConfig(**get("denoise"))
    feat = FeatureConfig(
        glcm=GlcmConfig(**get("glcm")),
        hoc=HocConfig(**get("hoc")),
        gsp=GspConfig(**get("gsp")),
        **get("feat"),
    )
    train = TrainConfig(**{"seed": DEFAULT_SEED, **get("train")})
    if seed is not None:
        train = replace(train, seed=seed)

    run = {"workers": DEFAULT_WORKERS, **get("run")}
    if workers is not None:
        run["workers"] = workers
    return PipelineConfig(
        pre=PreprocessConfig(**get("pre")),
        enh=EnhanceConfig(denoise=denoise, **get("enh")),
        feat=feat,
        train=train,
        **run,
    )


def load_config(path=None, workers=None, seed=None):
    """Read a config file (or none) into a PipelineConfig"""
    if path is None:
        return build_config(workers=workers, seed=seed)
    try:
        with open(path) as f:
            lines = f.readlines()
    except OSError as e:
        raise InputError(f"cannot read config {path}: {e}") from e
    return build_config(parse_config_lines(lines, str(path)), workers, seed)


def parse_grid(kind="preset", cells=None):
    """Preset grid, or custom comma-separated ``HUxBS`` cells"""
    if kind == "preset":
        return ExperimentConfig().grid
    if kind != "custom":
        raise InputError(f"grid must be preset or custom, got {kind!r}")
    if not cells:
        raise InputError("a custom grid needs --cells HUxBS[,HUxBS...]")
    out = []
    for item in cells.split(","):
        hu, _, bs = item.strip().lower().partition("x")
        try:
            out.append((int(hu), int(bs)))
        except ValueError as e:
            raise InputError(f"grid cell must look like HUxBS, got {item!r}") from e
    return tuple(out)
