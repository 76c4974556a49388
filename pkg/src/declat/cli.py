"""Command-line front end: reproducible file-based runs of every subsystem.

Subcommands: audit, assemble, simulate, eigen, dof, pml, pic, genmesh.
All flags are long-form; outputs are deterministic for a fixed seed and
carry a schema or header line identifying the format.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import generators
from .audit import run_full_audit
from .dof import dof_audit
from .hodge import MaterialMap, assemble_galerkin_dual, assemble_hodge, write_coo
from .maxwell import (
    SimulationConfig,
    apply_pec,
    eigenmodes,
    leapfrog_run,
    stable_timestep,
    write_trace,
)
from .mesh import classify_boundary, load_mesh, write_mesh
from .pic import conservation_report_json, verify_conservation
from .pml import reflection_sweep, write_sweep
from .whitney import WhitneyBasis


def _materials(args) -> MaterialMap:
    return MaterialMap(eps=args.eps, mu=args.mu)


def _add_mesh_arg(p, required=True):
    p.add_argument("--mesh", required=required, help="path to a declat-mesh file")


def _add_material_args(p):
    p.add_argument("--eps", type=float, default=1.0, help="uniform permittivity")
    p.add_argument("--mu", type=float, default=1.0, help="uniform permeability")


def cmd_genmesh(args) -> int:
    kind = args.kind
    if kind == "tet1":
        mesh = generators.single_tet()
    elif kind == "kuhn":
        mesh = generators.kuhn_cube()
    elif kind == "box":
        mesh = generators.box_mesh(
            args.n, args.ny or args.n, args.nz or args.n,
            lengths=(args.lx, args.ly, args.lz),
        )
    elif kind == "annulus":
        mesh = generators.annulus_mesh(args.segments)
    else:
        raise SystemExit(f"unknown mesh kind {kind!r}")
    write_mesh(mesh, args.out)
    print(f"wrote {args.out}: N_V={mesh.n_vertices} N_E={mesh.n_edges} "
          f"N_F={mesh.n_faces} N_P={mesh.n_tets}")
    return 0


def cmd_audit(args) -> int:
    mesh = load_mesh(args.mesh)
    report = run_full_audit(mesh)
    text = report.to_json() if args.json else report.to_text()
    if args.out:
        Path(args.out).write_text(text + "\n")
    else:
        print(text)
    return 0 if report.passed else 1


def cmd_assemble(args) -> int:
    mesh = load_mesh(args.mesh)
    materials = _materials(args)
    if args.which == "galerkin":
        h_eps_inv, h_mu = assemble_galerkin_dual(mesh, materials)
        base = Path(args.out)
        write_coo(h_eps_inv, base.with_suffix(".eps_inv" + base.suffix))
        write_coo(h_mu, base.with_suffix(".mu" + base.suffix))
        print(f"wrote {base.with_suffix('.eps_inv' + base.suffix)} and "
              f"{base.with_suffix('.mu' + base.suffix)}")
    else:
        H = assemble_hodge(mesh, materials, args.which)
        write_coo(H, args.out)
        print(f"wrote {args.out}: shape {H.shape} nnz {H.nnz}")
    return 0


def cmd_simulate(args) -> int:
    mesh = load_mesh(args.mesh)
    cls = classify_boundary(mesh)
    ops = apply_pec(mesh, cls, _materials(args))
    if ops.n_edges == 0:
        raise SystemExit("mesh has no interior edges after PEC reduction")
    bound = stable_timestep(ops)
    dt = args.dt if args.dt is not None else args.dt_factor * bound
    if dt > bound and not args.force:
        raise SystemExit(
            f"dt={dt!r} exceeds the stability bound {bound!r}; use --force to override"
        )
    rng = np.random.default_rng(args.seed)
    E0 = rng.standard_normal(ops.n_edges) if args.init == "random" else None
    B0 = rng.standard_normal(ops.n_faces) if args.init == "random" else None
    cfg = SimulationConfig(
        dt=dt, steps=args.steps, hodge_inverse=args.hodge_inverse,
        trace_every=args.trace_every,
    )
    _, trace = leapfrog_run(ops, cfg, E0, B0)
    write_trace(trace, args.out)
    print(f"wrote {args.out}: {args.steps} steps at dt={float(dt)!r} "
          f"(bound {float(bound)!r}); invariant drift/step {trace.drift_per_step():.3e}")
    return 0


def cmd_eigen(args) -> int:
    mesh = load_mesh(args.mesh)
    cls = classify_boundary(mesh)
    ops = apply_pec(mesh, cls, _materials(args))
    res = eigenmodes(ops, count=args.count, sigma=args.sigma)
    report = dof_audit(mesh, cls)
    payload = {
        "schema": "declat-eigen-1",
        "k2": [float(v) for v in res.k2],
        "zero_mode_count_computed": res.zero_count,
        "zero_mode_count_certified": report.interior_counts["N_V_h"]
        + report.harmonic_1,
        "nonzero_mode_count_certified": report.theta_E,
        "zero_tol": res.zero_tol,
    }
    text = json.dumps(payload, sort_keys=True, indent=2)
    Path(args.out).write_text(text + "\n") if args.out else print(text)
    return 0


def cmd_dof(args) -> int:
    mesh = load_mesh(args.mesh)
    report = dof_audit(mesh)
    text = report.to_json()
    Path(args.out).write_text(text + "\n") if args.out else print(text)
    return 0 if report.passed else 1


def cmd_pml(args) -> int:
    if not args.sweep:
        raise SystemExit("pml currently supports --sweep")
    nx, nz = args.nx, args.nz
    length = args.length
    mesh = generators.box_mesh(nx, nx, nz, lengths=(1.0, 1.0, length))
    cls = classify_boundary(mesh)
    omega = args.omega_factor * np.pi
    kz = float(np.sqrt(omega**2 - np.pi**2))
    mids = mesh.vertices[mesh.edges].mean(axis=1)
    evec = mesh.vertices[mesh.edges[:, 1]] - mesh.vertices[mesh.edges[:, 0]]
    h = length / nz
    ydir = (np.abs(evec[:, 0]) < 1e-12) & (np.abs(evec[:, 2]) < 1e-12)
    sel = ydir & (np.abs(mids[:, 2] - args.source_z) < 0.51 * h)
    src_edges = np.flatnonzero(sel)
    src_vals = np.sin(np.pi * mids[sel, 0]) * np.abs(evec[sel, 1])
    zs = np.linspace(args.window_lo, args.window_hi, 49)
    pts = np.stack([np.full_like(zs, 0.5), np.full_like(zs, 0.5), zs], axis=1)
    omega_maxes = [float(x) for x in args.omega_maxes.split(",")]
    rows = reflection_sweep(
        mesh, cls, omega, omega_maxes,
        pml_start=args.pml_start, pml_end=length,
        source_edges=src_edges, source_values=src_vals,
        sample_points=pts, kz=kz,
    )
    write_sweep(rows, args.out)
    print(f"wrote {args.out}")
    for r in rows:
        print(f"  omega_max={r.omega_max_profile:g} |R|={r.reflection_mag:.4e}")
    return 0


def cmd_pic(args) -> int:
    mesh = load_mesh(args.mesh) if args.mesh else generators.box_mesh(3)
    basis = WhitneyBasis(mesh)
    rng = np.random.default_rng(args.seed)
    lo = mesh.vertices.min(axis=0)
    hi = mesh.vertices.max(axis=0)
    span = hi - lo
    q, tau = args.charge, args.tau
    worst = 0.0
    for _ in range(args.paths):
        a = lo + span * (0.02 + 0.96 * rng.random(3))
        b = lo + span * (0.02 + 0.96 * rng.random(3))
        worst = max(worst, verify_conservation(basis, a, b, q, tau))
    text = conservation_report_json(worst, q / tau, args.paths)
    Path(args.out).write_text(text + "\n") if args.out else print(text)
    return 0 if worst <= 1e-12 * abs(q / tau) else 1


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="declat",
        description="discrete exterior calculus on tetrahedral lattices",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("genmesh", help="write one of the shipped test meshes")
    p.add_argument("--kind", required=True,
                   choices=["tet1", "kuhn", "box", "annulus"])
    p.add_argument("--n", type=int, default=3)
    p.add_argument("--ny", type=int, default=None)
    p.add_argument("--nz", type=int, default=None)
    p.add_argument("--lx", type=float, default=1.0)
    p.add_argument("--ly", type=float, default=1.0)
    p.add_argument("--lz", type=float, default=1.0)
    p.add_argument("--segments", type=int, default=8)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_genmesh)

    p = sub.add_parser("audit", help="run the three-section lattice audit")
    _add_mesh_arg(p)
    p.add_argument("--json", action="store_true")
    p.add_argument("--out", default=None)
    p.set_defaults(fn=cmd_audit)

    p = sub.add_parser("assemble", help="assemble Hodge matrices to COO text")
    _add_mesh_arg(p)
    _add_material_args(p)
    p.add_argument("--which", default="eps", choices=["eps", "mu_inv", "galerkin"])
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_assemble)

    p = sub.add_parser("simulate", help="leapfrog run with energy trace")
    _add_mesh_arg(p)
    _add_material_args(p)
    p.add_argument("--dt", type=float, default=None)
    p.add_argument("--dt-factor", type=float, default=0.9,
                   help="fraction of the stability bound when --dt is omitted")
    p.add_argument("--steps", type=int, default=1000)
    p.add_argument("--hodge-inverse", default="exact",
                   help="'exact' or 'spai:<level>'")
    p.add_argument("--init", default="random", choices=["random", "zero"])
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trace-every", type=int, default=1)
    p.add_argument("--force", action="store_true")
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_simulate)

    p = sub.add_parser("eigen", help="curl-curl eigenvalues and mode counts")
    _add_mesh_arg(p)
    _add_material_args(p)
    p.add_argument("--count", type=int, default=8)
    p.add_argument("--sigma", type=float, default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(fn=cmd_eigen)

    p = sub.add_parser("dof", help="degree-of-freedom audit report")
    _add_mesh_arg(p)
    p.add_argument("--out", default=None)
    p.set_defaults(fn=cmd_dof)

    p = sub.add_parser("pml", help="absorbing-layer reflection sweep")
    p.add_argument("--sweep", action="store_true")
    p.add_argument("--nx", type=int, default=4)
    p.add_argument("--nz", type=int, default=24)
    p.add_argument("--length", type=float, default=6.0)
    p.add_argument("--omega-factor", type=float, default=1.4,
                   help="angular frequency in units of the cutoff pi")
    p.add_argument("--omega-maxes", default="0,2,4,8,12,16")
    p.add_argument("--pml-start", type=float, default=4.5)
    p.add_argument("--source-z", type=float, default=0.625)
    p.add_argument("--window-lo", type=float, default=1.2)
    p.add_argument("--window-hi", type=float, default=4.2)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_pml)

    p = sub.add_parser("pic", help="charge-conservation check on random paths")
    p.add_argument("--mesh", default=None)
    p.add_argument("--paths", type=int, default=10000)
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--charge", type=float, default=1.0)
    p.add_argument("--tau", type=float, default=1.0)
    p.add_argument("--out", default=None)
    p.set_defaults(fn=cmd_pic)

    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
