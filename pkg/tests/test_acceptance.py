"""Acceptance suite: one test per criterion, each reported as a PASS/FAIL line."""

import math
import time

import numpy as np
import pytest

from conftest import ACCEPTANCE_RESULTS
from ctqw_search.cli import main
from ctqw_search.exceptions import TargetNotInGraph
from ctqw_search.generators import SearchParams, classical_generator, quantum_hamiltonian
from ctqw_search.lattice import (
    automorphism_orbit,
    build_from_coords,
    build_hex_patch,
    build_paper31,
    hex_patch_coords,
    resolve_target,
)
from ctqw_search.photonics import (
    BeamSpec,
    CouplingLaw,
    WaveguideArraySpec,
    get_preset,
    input_field,
    intensity_distribution,
    load_presets,
    propagate_array,
    rotation_asymmetry,
)
from ctqw_search.propagator import evolve_classical, evolve_quantum, expm, ode_oracle
from ctqw_search.search import (
    SpatialSearch,
    beta_size_surface,
    beta_time_heatmap,
    ratio_series,
    run_search,
    scaling_study,
    uniform_state,
)
from ctqw_search.validation import make_grid

# Frozen from the dense-grid runs (step 1e-3, golden-section refinement).
MIN_PEAK_RATIO = 1.5  # paper31 peaks: C 4.425, S 2.390
TILT_RATIO_MIN = 10.0  # 2 mrad asymmetry / symmetric tolerance; measured 1.05e8
SYMMETRY_TOL = 1e-9
COUPLING_POINTS = [(23.40, 0.060), (24.37, 0.053), (25.30, 0.047), (26.56, 0.040)]
PRESET_GAMMA_T = {"A": (1.16, 2.32), "B": (1.02, 2.05), "C": (0.91, 1.81), "D": (0.77, 1.54)}


def record(key, passed, detail):
    ACCEPTANCE_RESULTS[key] = (bool(passed), detail)
    assert passed, detail


def windows_above_one(times, ratio, threshold=1.0 + 1e-9):
    """Maximal runs of consecutive grid points with ``ratio > threshold``."""
    runs, start = [], None
    for k, flag in enumerate(ratio > threshold):
        if flag and start is None:
            start = k
        if start is not None and (not flag or k == len(ratio) - 1):
            runs.append((times[start], times[k if flag else k - 1]))
            start = None
    return runs


def random_connected_subset(rng, size, pool_layers=4):
    pool = set(hex_patch_coords(pool_layers))
    picked = [(0, 0)]
    chosen = {(0, 0)}
    offsets = [(1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (-1, -1)]
    while len(picked) < size:
        i, j = picked[rng.integers(len(picked))]
        di, dj = offsets[rng.integers(6)]
        c = (i + di, j + dj)
        if c in pool and c not in chosen:
            chosen.add(c)
            picked.append(c)
    return build_from_coords(picked)


def test_criterion_01_initial_condition(paper31):
    t0 = time.perf_counter()
    s = run_search(paper31, "C", 4.16, [0.0])
    pq, pc = s.quantum_target_prob[0], s.classical_target_prob[0]
    r = ratio_series(s).ratio[0]
    err = max(abs(pq - 1 / 31), abs(pc - 1 / 31), abs(r - 1))
    elapsed = time.perf_counter() - t0
    record("1", err <= 1e-10 and elapsed < 1, f"max error {err:.2e} at gamma*t=0 ({elapsed:.2f}s)")


def test_criterion_02_oracle_equivalence(paper31):
    t0 = time.perf_counter()
    rng = np.random.default_rng(2024)
    checkpoints = np.linspace(0.0, 5.0, 11)

    hams = []
    for _ in range(20):
        x = rng.normal(size=(31, 31))
        h = 0.5 * (x + x.T)
        hams.append(h * 10.0 / np.max(np.abs(h).sum(axis=0)))
    psi0 = rng.normal(size=(20, 31)) + 1j * rng.normal(size=(20, 31))
    psi0 /= np.linalg.norm(psi0, axis=1, keepdims=True)

    gens, p0 = [], []
    for _ in range(10):
        g = random_connected_subset(rng, 31)
        gens.append(classical_generator(g, int(rng.integers(31))))
        p0.append(np.full(31, 1 / 31))
    p0 = np.array(p0)

    worst = 0.0
    ref_q, ref_c = psi0.astype(complex), p0.copy()
    stack_q = -1j * np.array(hams)
    stack_c = -np.array(gens)
    for a, b in zip(checkpoints[:-1], checkpoints[1:]):
        ref_q = ode_oracle(stack_q, ref_q, b - a)
        ref_c = ode_oracle(stack_c, ref_c, b - a)
        for k in range(20):
            worst = max(worst, np.max(np.abs(evolve_quantum(hams[k], psi0[k], b) - ref_q[k])))
        for k in range(10):
            worst = max(worst, np.max(np.abs(evolve_classical(gens[k], p0[k], 1.0, b) - ref_c[k])))
    elapsed = time.perf_counter() - t0
    record("2", worst <= 1e-8 and elapsed < 30, f"max |spectral/Pade - RK4| = {worst:.2e} ({elapsed:.1f}s)")


def test_criterion_03_classical_structure(paper31):
    c_err = 0.0
    for w in (None, resolve_target(paper31, "C"), resolve_target(paper31, "S")):
        lc = classical_generator(paper31, w)
        for gt in (0.1, 1.0, 10.0):
            c = expm(-gt * lc)
            c_err = max(c_err, np.max(np.abs(c.sum(axis=0) - 1)), max(0.0, -c.min()))
    grid = np.linspace(0.0, 5.0, 500)
    mono = True
    for target in ("C", "S"):
        pc = SpatialSearch(4.16, target).fit(paper31).classical_target_probability(grid)
        mono &= bool(np.all(np.diff(pc) >= 0))
    dimer = build_from_coords([(0, 0), (1, 0)])
    p = evolve_classical(classical_generator(dimer, 1), [0.5, 0.5], 1.0, math.log(2))
    dimer_err = abs(p[1] - 0.75)
    ok = c_err <= 1e-10 and mono and dimer_err <= 1e-10
    record("3", ok, f"column-sum error {c_err:.1e}, monotone={mono}, dimer error {dimer_err:.1e}")


def test_criterion_04_quantum_advantage_window(paper31):
    t0 = time.perf_counter()
    grid = make_grid(5.0, 1e-3)
    parts, ok = [], True
    for target in ("C", "S"):
        r = ratio_series(run_search(paper31, target, 4.16, grid)).ratio
        inner = windows_above_one(grid[1:-1], r[1:-1])
        peak = float(r.max())
        ok &= bool(inner) and peak > MIN_PEAK_RATIO
        first = inner[0] if inner else (math.nan, math.nan)
        parts.append(f"{target}: window [{first[0]:.3f}, {first[1]:.3f}] max R {peak:.3f}")
    elapsed = time.perf_counter() - t0
    record("4", ok and elapsed < 10, "; ".join(parts) + f" ({elapsed:.1f}s)")


def test_criterion_05_scaling():
    t0 = time.perf_counter()
    records = scaling_study(range(1, 6), ["C", "1N", "2N"], 4.0, threads=4)
    with pytest.raises(TargetNotInGraph):
        resolve_target(build_hex_patch(1), "2N")
    ok = len(records) == 14 and all(r.r_opt > 1 and r.pq_opt > r.pc_opt for r in records)
    worst = min(records, key=lambda r: r.r_opt)
    elapsed = time.perf_counter() - t0
    record(
        "5",
        ok and elapsed < 120,
        f"{len(records)} cells (2N absent at n=7), min r_opt {worst.r_opt:.4f} "
        f"at n={worst.n} {worst.target_kind} ({elapsed:.1f}s)",
    )


def test_criterion_06a_robustness_surface():
    surface = beta_size_surface(range(1, 5), ["C", "1N", "2N"], [2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0], threads=4)
    bad = [
        f"beta={r.beta_over_gamma:g} n={r.n} {r.target_kind} r_opt={r.r_opt:.6f}"
        for r in surface.records
        if not r.r_opt > 1 + 1e-9
    ]
    detail = f"{len(surface.records)} cells, {len(bad)} without advantage"
    if bad:
        detail += ": " + "; ".join(bad)
    record("6a", not bad, detail)


def test_criterion_06b_smooth_in_beta(paper31):
    grid = make_grid(5.0, 1e-3)
    worst = 0.0
    for target in ("C", "S"):
        table = beta_time_heatmap(paper31, target, [4.11, 4.16, 4.21], grid)
        worst = max(worst, float(np.max(np.abs(table[[0, 2]] - table[1]))))
    record("6b", worst < 0.02, f"max |p_w^Q(4.16+-0.05) - p_w^Q(4.16)| = {worst:.4f}")


def test_criterion_07_time_scale_invariance(paper31):
    w = resolve_target(paper31, "C")
    h1 = quantum_hamiltonian(paper31, SearchParams(1.0, 4.16, w))
    h10 = quantum_hamiltonian(paper31, SearchParams(10.0, 41.6, w))
    lc = classical_generator(paper31, w)
    p0 = np.full(31, 1 / 31)
    worst = 0.0
    for t in np.linspace(0.0, 5.0, 26):
        a = evolve_quantum(h1, uniform_state(31), t)
        b = evolve_quantum(h10, uniform_state(31), t / 10)
        worst = max(worst, np.max(np.abs(a - b)))
        worst = max(worst, np.max(np.abs(evolve_classical(lc, p0, 1.0, t) - evolve_classical(lc, p0, 10.0, t / 10))))
    record("7", worst <= 1e-10, f"max deviation {worst:.2e}")


def test_criterion_08_photonics():
    law = CouplingLaw().fit([a for a, _ in COUPLING_POINTS], [g for _, g in COUPLING_POINTS])
    fit_err = max(abs(g_fit - g) / g for g_fit, (_, g) in zip(law.predict([a for a, _ in COUPLING_POINTS]), COUPLING_POINTS))

    table_err = 0.0
    for name, expected in PRESET_GAMMA_T.items():
        p = get_preset(name)
        for length, value in zip(("short", "long"), expected):
            table_err = max(table_err, abs(p.gamma_t(p.length(length)) - value))

    spec = WaveguideArraySpec.from_preset("A", length="long", target="C")
    p = intensity_distribution(propagate_array(spec, input_field(spec, BeamSpec(400.0))))
    on_target = int(np.argmax(p)) == spec.target

    gamma = law.predict([25.0])[0]
    tilt = WaveguideArraySpec(build_paper31().with_spacing(25.0), gamma, 0.0, None, load_presets()["A"].length("long"))

    def asym(mrad):
        out = propagate_array(tilt, input_field(tilt, BeamSpec(tilt_x_mrad=mrad)))
        return rotation_asymmetry(tilt.graph, intensity_distribution(out))

    flat, tilted = asym(0.0), asym(2.0)
    ok = (
        fit_err < 0.05
        and table_err <= 0.005
        and on_target
        and flat <= SYMMETRY_TOL
        and tilted >= TILT_RATIO_MIN * SYMMETRY_TOL
    )
    record(
        "8",
        ok,
        f"fit error {100 * fit_err:.2f}%, gamma*t error {table_err:.4f}, argmax on target={on_target}, "
        f"asymmetry 0 mrad {flat:.1e} / 2 mrad {tilted:.3f}",
    )


def test_criterion_09_rotation_symmetry():
    rng = np.random.default_rng(99)
    worst = 0.0
    for layers in (1, 2, 3, 4):
        g = build_hex_patch(layers)
        probs = SpatialSearch(4.0, "C").fit(g).quantum_site_probabilities(np.sort(rng.uniform(0, 10, 20)))
        perms = automorphism_orbit(g)
        assert len(perms) == 6
        for perm in perms:
            worst = max(worst, float(np.max(np.abs(probs[:, perm] - probs))))
    record("9", worst <= 1e-9, f"max change under rotations {worst:.1e} (layers 1-4, 20 times)")


def test_criterion_10_determinism(tmp_path):
    outputs = []
    for run, threads in enumerate(("1", "1", "8")):
        d = tmp_path / str(run)
        assert main(["scaling", "--layers", "1..4", "--threads", threads, "--output-dir", str(d)]) == 0
        outputs.append((d / "scaling.csv").read_bytes())
    same = outputs[0] == outputs[1] == outputs[2]
    record("10", same, f"scaling.csv byte-identical across repeats and threads: {same}")
