"""
Assumption Explorer
Shows which one-sided bound hypotheses each velocity model satisfies as the
data range [m, M] narrows
Run: python scripts/assumption_explorer.py
"""

import pandas as pd

from app.engine.velocity import check_assumptions, ob2_threshold, validity_interval
from app.schemas.velocity_schema import VelocityModel


class AssumptionExplorer:
    """
    Tabulates AssumptionChecker verdicts over ratios m/M for the catalog
    """

    RATIOS = [0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9]

    def __init__(self, M: float = 1.0):
        self.M = M
        self.models = [
            VelocityModel.greenshields(1.0, 1.0),
            VelocityModel.underwood(1.0, 1.0),
            VelocityModel.gen_greenshields(1.0, 1.0, 2),
            VelocityModel.gen_greenshields(1.0, 1.0, 3),
            VelocityModel.gen_california(1.0, 1.0, 0.5),
            VelocityModel.gen_california(1.0, 1.0, 0.5, regularized=True),
            VelocityModel.greenberg(1.0, 1.0),
        ]

    def verdict_table(self, model: VelocityModel) -> pd.DataFrame:
        rows = []
        for ratio in self.RATIOS:
            m = ratio * self.M
            if ratio == 0.0 and validity_interval(model, 2)[2]:
                m = 1e-6 * self.M
            rep = check_assumptions(model, m, self.M, samples=1025)
            rows.append({
                "m/M": ratio,
                "linear": rep.linear,
                "conv_more": rep.conv_more,
                "ob2": rep.ob2,
                "ob3": rep.ob3,
                "h=0": rep.greenberg_zero_h,
                "kappa_w": rep.kappa_w,
                "kappa_g": rep.kappa_g,
            })
        return pd.DataFrame(rows)

    def show_model(self, model: VelocityModel):
        print(f"\n{'='*60}")
        print(f"MODEL: {model.describe()}")
        print(f"{'='*60}")
        with pd.option_context("display.width", 120, "display.max_columns", 20):
            print(self.verdict_table(model).to_string(index=False))

    def show_thresholds(self):
        """
        Smallest m/M for which the ob2 condition holds, found by bisection
        """
        print(f"\n{'='*60}")
        print(f"📊 OB2 THRESHOLDS (M = {self.M:g})")
        print(f"{'='*60}\n")
        for model in self.models:
            try:
                threshold = ob2_threshold(model, self.M)
                print(f"  {model.describe():<50} m/M >= {threshold:.6f}")
            except ValueError as e:
                print(f"  {model.describe():<50} unavailable ({e})")


def main():
    """
    Run the explorer
    """
    print("🧭 VELOCITY ASSUMPTION EXPLORER")
    print("=" * 60)

    explorer = AssumptionExplorer()
    for model in explorer.models:
        explorer.show_model(model)
    explorer.show_thresholds()

    print(f"\n{'='*60}")
    print("✅ Exploration Complete!")
    print(f"{'='*60}\n")


if __name__ == "__main__":
    main()
