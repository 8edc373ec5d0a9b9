"""Bundled example invocations with checked-in golden outputs.

Regenerate with ``python3 tests/cli_cases.py`` after an intended output change.
"""

from pathlib import Path

GOLDEN = Path(__file__).parent / "golden"

CASES = {
    "decompose_two_point": ["decompose", "two_point.dist", "-p", "1/2"],
    "decompose_mixed_colliding": ["decompose", "mixed.dist", "-p", "0.3", "--variant", "colliding"],
    "decompose_gapped": ["decompose", "gapped.dist", "-p", "5/8", "--grid", "8"],
    "beta_scan_uniform": ["beta-scan", "uniform.dist"],
    "beta_scan_skewed": ["beta-scan", "skewed_two_point.dist", "--p-grid", "0.05:0.95:0.05"],
    "antichain_prob_middle": ["antichain", "prob", "middle_layer_N4.txt"],
    "antichain_lym_middle": ["antichain", "lym", "middle_layer_N4.txt"],
    "antichain_bounds_varied": ["antichain", "bounds", "middle_layer_N4.txt", "--profile", "0.3,0.5,0.5,0.6"],
    "antichain_max_12": ["antichain", "max", "-N", "12", "-p", "0.5"],
    "antichain_max_5_enum": ["antichain", "max", "-N", "5", "--enumerate"],
    "concentration_bernoulli": ["concentration", "bernoulli_N4.cfg"],
    "concentration_sum_uniform": ["concentration", "sum_uniform_N100.cfg"],
    "lattice_three_point": ["lattice", "three_point.dist", "--box", "32x32", "--seed", "0"],
    "lattice_uniform_line": ["lattice", "uniform.dist", "--stencil", "line3_1d.stencil", "--box", "16", "--p", "1/2"],
    "lattice_mixed_cross": ["lattice", "mixed.dist", "--stencil", "cross_2d.stencil", "--box", "8x8", "--seed", "3"],
}


def run_case(argv, out):
    from pacman_decomp.cli import main

    return main([*argv, "--out", str(out)])


if __name__ == "__main__":
    GOLDEN.mkdir(exist_ok=True)
    for name, argv in CASES.items():
        code = run_case(argv, GOLDEN / f"{name}.csv")
        print(name, code)
