import json
import subprocess
import sys

import numpy as np
import pytest
from PIL import Image


def write_gray(path, arr):
    Image.fromarray(np.asarray(arr, dtype=np.uint8), mode="L").save(path)


@pytest.fixture
def tiny_manifest(tmp_path):
    """Five 24x24 synthetic samples, all in the train split.

    Raster triples follow the dataset layout: a noisy 'raw' image, a clean
    'processed' image holding just the object pulse, and the binary mask.
    """
    rng = np.random.default_rng(0)
    entries = []
    for i in range(5):
        scan_id = f"blob-{i}"
        mask = np.zeros((24, 24), np.uint8)
        r, c = rng.integers(2, 16, 2)
        mask[r:r + 6, c:c + 4] = 1
        clean = mask * int(rng.integers(150, 255))
        noisy = clean + rng.integers(0, 60, (24, 24))
        write_gray(tmp_path / f"{scan_id}.raw.png", np.clip(noisy, 0, 255))
        write_gray(tmp_path / f"{scan_id}.proc.png", clean)
        write_gray(tmp_path / f"{scan_id}.mask.png", mask * 255)
        entries.append({"scan_id": scan_id,
                        "raw_path": f"{scan_id}.raw.png",
                        "processed_path": f"{scan_id}.proc.png",
                        "mask_path": f"{scan_id}.mask.png",
                        "split": "train"})
    doc = {"seed": 0, "split_fraction": 1.0,
           "counts": {"train": 5, "val": 0}, "entries": entries}
    (tmp_path / "manifest.json").write_text(json.dumps(doc))
    return tmp_path / "manifest.json"


@pytest.fixture(scope="session")
def simulated_dataset(tmp_path_factory):
    """A real dataset produced by the primary toolkit's dataset command."""
    out = tmp_path_factory.mktemp("dataset")
    cmd = [sys.executable, "-m", "p3sonar.cli", "dataset",
           "--count", "10", "--seed", "3", "--split", "0.8",
           "--out", str(out)]
    subprocess.run(cmd, check=True, capture_output=True)
    return out / "manifest.json"
