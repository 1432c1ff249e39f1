#!/usr/bin/env python3
"""Smoke test for the hamlsh_py extension module.

Builds are produced by cargo (`cargo build -p hamlsh-py`); this script
locates the cdylib, stages it under the importable name, and exercises the
bound surface end to end: parameter derivation, dataset generation and
file IO, index queries, an adversarial walk driven to a certified false
negative, the random baseline, both defended index variants, the exact
collision oracle, and the TOML-driven sweep engine.

Usage: python3 python/smoke_test.py [--lib PATH]
"""

import argparse
import shutil
import sys
import tempfile
from pathlib import Path

REPO = Path(__file__).resolve().parent.parent


def stage_module(explicit: str | None) -> Path:
    """Copy the built cdylib into a temp dir under the importable name."""
    if explicit:
        candidates = [Path(explicit)]
    else:
        candidates = [
            REPO / "target" / profile / "libhamlsh_py.so"
            for profile in ("release", "debug")
        ]
    lib = next((p for p in candidates if p.exists()), None)
    if lib is None:
        sys.exit(
            "error: no built extension found; run `cargo build -p hamlsh-py` "
            f"first (looked at: {', '.join(str(p) for p in candidates)})"
        )
    stage = Path(tempfile.mkdtemp(prefix="hamlsh-py-"))
    shutil.copy2(lib, stage / "hamlsh_py.so")
    sys.path.insert(0, str(stage))
    return lib


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--lib", help="path to the built libhamlsh_py.so")
    args = parser.parse_args()
    lib = stage_module(args.lib)
    import hamlsh_py as hp

    print(f"loaded {lib}")

    # Parameter derivation: the default setting.
    params = hp.Params.derive(1000, 300, 30)
    assert params.k == 31 and params.l == 105, repr(params)
    assert params.far_radius() == 60
    assert abs(params.p1 - 0.9) < 1e-12 and abs(params.p2 - 0.8) < 1e-12
    print(f"params ok: {params!r}")

    # Oracle sanity: closed form at tiny size, coupon expectation bounds.
    assert hp.exact_collision_prob(4, 1, 1) == 0.75
    assert 29.4 < hp.expected_support(300, 31) < 29.6

    # Datasets: generation, round-trip through the text format, scans.
    ds = hp.Dataset.zero(1000, 300)
    assert len(ds) == 1000 and ds.dim == 300
    origin = ds.point(0)
    assert sum(origin) == 0
    with tempfile.TemporaryDirectory() as tmp:
        path = Path(tmp) / "points.txt"
        rds = hp.Dataset.random(50, 64, seed=11)
        rds.save(path)
        back = hp.Dataset.load(path)
        assert len(back) == 50 and back.dim == 64
        assert [back.point(i) for i in range(50)] == [rds.point(i) for i in range(50)]
    assert ds.min_distance(origin) == 0
    print("datasets ok")

    # Plain index: near points answered, query counter advances.
    idx = hp.Index.build(ds, params, seed=1)
    assert idx.query(origin) is not None
    assert idx.queries_used == 1
    far = origin.copy()
    for i in range(150):  # distance 150 >> c*r = 60
        far[i] = 1
    assert idx.query(far) is None
    assert idx.queries_used == 2
    print(f"index ok: {idx!r}")

    # Adversarial walk: restart until a certified false negative, then
    # check the certificate against the index and the dataset directly.
    outcome = None
    for seed in range(2000):
        got = hp.run_walk(idx, origin, algo="fast", seed=seed, record_trace=True)
        if got.success:
            outcome = got
            break
    assert outcome is not None, "no certified false negative in 2000 attempts"
    cert = outcome.query
    assert idx.query(cert) is None, "certificate no longer reproduces"
    assert ds.min_distance(cert) <= params.r, "certificate is not a near point"
    kinds = [kind for kind, _, _ in outcome.trace]
    assert kinds[0] == "start" and "outer" in kinds
    print(
        f"walk ok: certified at distance {ds.min_distance(cert)} "
        f"after {outcome.lsh_queries_used} queries (seed {seed})"
    )

    # Random baseline on the same index.
    base = hp.random_baseline(idx, origin, params.r, seed=3, max_queries=200_000)
    assert base.success and idx.query(base.query) is None
    print(f"baseline ok: {base.lsh_queries_used} queries")

    # Isolated origin pick on a random dataset.
    rds = hp.Dataset.random(100, 64, seed=5)
    z, isolation = hp.find_isolated_origin(rds)
    assert rds.min_distance(z) == 0 and isolation >= 1
    print(f"isolated origin ok: isolation {isolation}")

    # Defended variants answer near queries through the same interface.
    small = hp.Params.derive(1000, 300, 30, 2.0, 1.0)
    for build in (
        lambda: hp.Index.build_resampled(ds, small, copies=4, query_samples=2, seed=7),
        lambda: hp.Index.build_dp(ds, small, copies=4, query_samples=4, seed=7),
    ):
        defended = build()
        hits = sum(defended.query(origin) is not None for _ in range(20))
        assert hits >= 15, f"defended index rarely answers the origin: {hits}/20"
    assert 0 < hp.DEFAULT_ALPHA < 1
    print("defenses ok")

    # The experiment engine, driven by the same TOML the CLI accepts.
    csv = hp.sweep_csv(
        """
        name = "smoke"
        trials = 20
        seed = 0

        [dataset]
        kind = "zero"

        [grid]
        n = 200
        d = 300
        r = 30
        """
    )
    header, row = csv.strip().splitlines()
    assert header.startswith("n,d,r,c,lambda,") and row.startswith("200,300,30,")
    print("sweep ok:", row)

    print("all smoke tests passed")


if __name__ == "__main__":
    main()
