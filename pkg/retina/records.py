import json
import logging
from pathlib import Path

import numpy as np
import pandas as pd

from retina.constants import FEATURE_NAMES, SCHEMA_VERSION
from retina.errors import InputError

logger = logging.getLogger(__name__)

SCHEMA_PREFIX = "# schema: "
ID_COLUMNS = ["image_id", "stage", "label", "dataset"]
FLOAT_FORMAT = "%.12g"


def records_to_frame(records):
    """Flatten feature records into a table sorted by image id"""
    rows = []
    for record in records:
        row = {"image_id": record.image_id, "stage": record.stage,
               "label": record.label, "dataset": record.dataset}
        row.update(zip(FEATURE_NAMES, record.vector))
        rows.append(row)
    df = pd.DataFrame(rows, columns=ID_COLUMNS + FEATURE_NAMES)
    return df.sort_values("image_id", kind="stable").reset_index(drop=True)


def write_feature_file(records, path):
    """Save feature records with the schema header line"""
    df = records if isinstance(records, pd.DataFrame) else records_to_frame(records)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as f:
        f.write(f"{SCHEMA_PREFIX}{SCHEMA_VERSION}\n")
        df.to_csv(f, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    logger.info("Wrote %d feature records to %s", len(df), path)
    return path


def read_feature_file(path):
    """Load a feature file, checking its schema and column order"""
    path = Path(path)
    if not path.exists():
        raise InputError(f"feature file not found: {path}")
    with open(path) as f:
        header = f.readline().strip()
    if header != f"{SCHEMA_PREFIX}{SCHEMA_VERSION}":
        raise InputError(f"{path}: expected schema {SCHEMA_VERSION!r}, found {header!r}")
    df = pd.read_csv(path, skiprows=1, dtype={"image_id": str})
    if list(df.columns) != ID_COLUMNS + FEATURE_NAMES:
        raise InputError(f"{path}: feature columns do not match schema {SCHEMA_VERSION}")
    if not np.all(np.isfinite(df[FEATURE_NAMES].to_numpy(dtype=np.float64))):
        raise InputError(f"{path}: feature file holds non-finite values")
    return df


def write_sidecar(path, data):
    """Save a per-image JSON record next to its output image"""
    path = Path(path)
    with open(path, "w") as f:
        json.dump(data, f, indent=2, sort_keys=True)
        f.write("\n")
    return path


def read_sidecar(path):
    path = Path(path)
    if not path.exists():
        return None
    with open(path) as f:
        return json.load(f)


def write_table(df, path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    df.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    return path


def read_table(path):
    path = Path(path)
    if not path.exists():
        raise InputError(f"report table not found: {path}")
    return pd.read_csv(path)
