"""
Comparing configurations with rank tests
========================================

A made-up table of per-fold accuracies in which one representation is
clearly better. Kruskal-Wallis and Dunn compare unpaired groups; Friedman
and Nemenyi compare architectures fold by fold.
"""
import numpy as np

from eegspect.distributions import studentized_range_isf
from eegspect.stats import run_battery

rng = np.random.default_rng(1)
table = {}
for arch, shift in (("lr_a", 0.0), ("lr_b", 0.01)):
    for rep, base in (("multitaper_psd", 0.95), ("welch_psd", 0.93), ("time", 0.6)):
        for w in (2, 10):
            table[(arch, rep, w)] = list(base + shift + rng.normal(0, 0.01, 10))

report = run_battery(table)
for entry in report.entries:
    g = ", ".join(f"{k}={v}" for k, v in entry.grouping.items())
    flag = "*" if entry.result.significant() else " "
    print(f"{flag} {entry.test:<15} {g:<55} p={entry.result.p_value:.4g}")
    for pair in entry.pairwise.pairs():
        if pair["significant"]:
            print(f"      {pair['a']} vs {pair['b']}: p_adj={pair['p_adj']:.4g}")

print("studentized range critical value, k=3:", round(studentized_range_isf(0.05, 3), 4))
