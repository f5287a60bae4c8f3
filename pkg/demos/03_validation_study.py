"""A miniature validation study on a phantom sweep.

Generates a 40-image sweep, measures every image, then runs the same agreement
analysis used for clinical comparisons: normality check, Pearson or Spearman,
Bland-Altman limits and the three plots per ratio.
"""
from pathlib import Path

from autocor import cli

out = Path("demo-out/study")
corpus, results = out / "corpus", out / "results"

cli.main(["phantom", "--n-pcor", "8", "--n-acor", "5", "--seed", "3", "--out", str(corpus)])
cli.main(["batch", str(corpus), "--out", str(results)])
cli.main(["validate", "--pred", str(results / "results.csv"), "--truth", str(corpus / "truth.csv"),
          "--out", str(out / "report")])

print(f"report and SVG plots in {out / 'report'}")
