#!/usr/bin/env python3
"""Smoke test for the blockpower_py extension module.

Build the module first, then run this script from anywhere:

    cargo build -p blockpower-py --features extension-module
    python3 python/smoke_test.py
"""

import pathlib
import shutil
import sys
import tempfile

ROOT = pathlib.Path(__file__).resolve().parents[1]


def find_library() -> pathlib.Path:
    candidates = [
        ROOT / "target" / profile / name
        for profile in ("debug", "release")
        for name in ("libblockpower_py.so", "libblockpower_py.dylib")
    ]
    built = [p for p in candidates if p.exists()]
    if not built:
        sys.exit(
            "extension module not found; build it first:\n"
            "    cargo build -p blockpower-py --features extension-module"
        )
    return max(built, key=lambda p: p.stat().st_mtime)


def main() -> None:
    with tempfile.TemporaryDirectory() as td:
        tmp = pathlib.Path(td)
        # CPython wants the bare module name, so copy under the import name.
        shutil.copy(find_library(), tmp / "blockpower_py.so")
        sys.path.insert(0, td)
        import blockpower_py as bp

        # Fixed example chain: generate, solve, compare against the oracle.
        m = bp.fig1()
        assert m.n == 5 and m.nnz == 10, (m.n, m.nnz)

        report = bp.solve(m, block_size=3, check_every=1)
        assert report.converged, report.status
        assert report.total_matvecs == 3 * report.total_iterations

        pi = bp.stationary_oracle(m)
        err = max(abs(a - b) for a, b in zip(report.distribution, pi))
        assert err <= 1e-8, err
        assert abs(sum(report.distribution) - 1.0) <= 1e-12

        # Same config twice gives the identical trajectory.
        again = bp.solve(m, block_size=3, check_every=1)
        assert report.history == again.history

        # Windowed run on a clustered chain must not use more matvecs
        # than the plain block run at the same block size.
        c = bp.clustered(3, 10, 1e-4, seed=0)
        plain = bp.solve(c, block_size=1, window=1, reorthonormalize=False)
        windowed = bp.solve(c, block_size=1, window=4, reorthonormalize=False)
        assert windowed.converged and plain.converged
        assert windowed.total_matvecs <= plain.total_matvecs, (
            windowed.total_matvecs,
            plain.total_matvecs,
        )

        # Reversible spectrum leads with the Perron eigenvalue.
        bd = bp.birth_death(10, 0.3, 0.3)
        mags = bp.spectrum(bd)
        assert abs(mags[0] - 1.0) <= 1e-10, mags[0]
        assert all(x >= y for x, y in zip(mags, mags[1:]))

        # MatrixMarket round trip preserves every entry exactly.
        path = tmp / "fig1.mtx"
        m.save(str(path))
        m2 = bp.TransitionMatrix.load(str(path))
        assert m2.triplets() == m.triplets()

        # One matvec by hand: columns of P^T stay probability vectors.
        y = m.apply_transpose([1.0, 0.0, 0.0, 0.0, 0.0])
        assert abs(sum(y) - 1.0) <= 1e-12

        print("smoke test passed")


if __name__ == "__main__":
    main()
