"""
A small end-to-end experiment on the synthetic corpus
=====================================================

Writes the corpus, catalogs it and runs logistic regression with 5-fold
cross-validation on two representations. Takes a minute or two.
"""
import tempfile
from pathlib import Path

import numpy as np

from eegspect.config import PipelineConfig, SplitSection
from eegspect.edf import build_catalog, save_catalog
from eegspect.pipeline import run_pipeline
from eegspect.representation import RepresentationKind
from eegspect.synth import SynthSpec, write_corpus

root = Path(tempfile.mkdtemp(prefix="eegspect-demo-"))
data = root / "data"
write_corpus(data, SynthSpec(seed=0, fs=128))
catalog = build_catalog(data)
save_catalog(catalog, data / "catalog.json")
print(len(catalog), "recordings,", sum(e.seizure_count for e in catalog), "seizures")

config = PipelineConfig(
    dataset_dir=data, output_dir=root / "out", windows=(5,), step_s=1,
    representations=(RepresentationKind.MULTITAPER_PSD, RepresentationKind.TIME),
    split=SplitSection(k=5))
result = run_pipeline(config)

for key, folds in result.accuracy.items():
    print(key, f"mean accuracy {np.mean(folds):.3f} +/- {np.std(folds, ddof=1):.3f}")
print((root / "out" / "ranking.csv").read_text())
print("outputs in", root / "out")
