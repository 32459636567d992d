"""
From annotated recording to labelled windows
============================================

One synthetic recording, segmented at every window size. Seizure windows are
anchored at each onset; balancing nonseizure windows come from the flanks.
"""
import numpy as np

from eegspect.edf import SeizureAnnotation
from eegspect.synth import SynthSpec, generate_corpus
from eegspect.windowing import WindowSpec, plan_segments, tile_region

rec = generate_corpus(SynthSpec(fs=128))[0]
annotations = [SeizureAnnotation(s, e) for s, e in rec.seizures]
duration = rec.samples.shape[1] / 128
print(rec.name, "seizures:", rec.seizures, "duration", duration, "s")

# Seizure windows advance by the step while they still touch the seizure,
# so their count depends on the step and not on the window length.
for w in (1, 2, 5, 10):
    spec = WindowSpec(w, step_s=1)
    plan = plan_segments(annotations, duration, spec, rec.name)
    print(f"{w:>2} s windows (overlap {spec.overlap_s} s): "
          f"{plan.count(1)} seizure + {plan.count(0)} nonseizure")

# Non-overlapping tiling of a 432 s stretch
print("432 s / 10 s tiles:", len(tile_region(0, 432, WindowSpec(10, 10))))

plan = plan_segments(annotations, duration, WindowSpec(10, 5), rec.name)
print("first windows:", plan.windows[:6])
print("label balance:", np.bincount(plan.labels))
