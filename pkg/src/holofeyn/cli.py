"""Command line workbench tying the engine together.

Every subcommand reads a graph in the text format of holofeyn.graphs
(dim / vertices / edge statements, '#' comments) and prints a report in
the format picked by --output: human text, json, or csv.  JSON is
emitted with sorted keys and no whitespace, so the same configuration
and seed produce byte-identical output; exact data (polynomials, matrix
entries) is rendered as strings of reduced fractions, and floats appear
only for quadrature and Monte Carlo results.

Exit codes: 0 success; 1 unreadable or malformed input; 2 a checked
identity failed; 3 quadrature or Monte Carlo did not converge.

The --threads flag defaults to the HOLOFEYN_THREADS environment
variable (then 1) and is forwarded to the quadrature and Monte Carlo
engines.  Test forms are JSON files in the schema of
holofeyn.amplitude.TestForm.to_dict; commands that need one fall back
to the deterministic default_test_form of the graph.
"""

import csv
import io
import json
import os

import click

from .amplitude import (TestForm, default_test_form, evaluate_W,
                        mc_oracle_W)
from .anomaly import (anomaly_symbol, anomaly_vanishes_exactly,
                      face_integral, o_apply, outer_boundary_decay,
                      quadratic_residual)
from .charts import QuadratureConfig
from .errors import HolofeynError, NonConvergence, ParseError
from .graphs import (EdgeSubset, _connected_edge_subsets, first_betti,
                     is_laman, parse_graph, spanning_trees)
from .graphpoly import (corner_expand, d_inverse, kirchhoff_polynomial,
                        m_inverse, t_variables)
from .symbolic import Polynomial


### report rendering

def _fmt_scalar(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if v is None:
        return "none"
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, (list, tuple)):
        return ", ".join(_fmt_scalar(x) for x in v)
    return str(v)


def _render_text(report):
    lines = []
    for k, v in report.items():
        if isinstance(v, list) and v and isinstance(v[0], dict):
            lines.append("%s:" % k)
            for item in v:
                lines.append("  " + "  ".join(
                    "%s=%s" % (kk, _fmt_scalar(vv))
                    for kk, vv in item.items()))
        else:
            lines.append("%s: %s" % (k, _fmt_scalar(v)))
    return "\n".join(lines) + "\n"


def _render_csv(report):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    for k, v in report.items():
        if isinstance(v, list) and v and isinstance(v[0], dict):
            cols = list(v[0].keys())
            w.writerow([k] + cols)
            for item in v:
                w.writerow([""] + [_fmt_scalar(item.get(c)) for c in cols])
        elif isinstance(v, (list, tuple)):
            w.writerow([k] + [_fmt_scalar(x) for x in v])
        else:
            w.writerow([k, _fmt_scalar(v)])
    return buf.getvalue()


def _emit(report, output):
    if output == "json":
        text = json.dumps(report, sort_keys=True,
                          separators=(",", ":")) + "\n"
    elif output == "csv":
        text = _render_csv(report)
    else:
        text = _render_text(report)
    click.echo(text, nl=False)


def _pair(z):
    z = complex(z)
    return [z.real, z.imag]


### inputs

def _load_graph(path, dim):
    with open(path) as fh:
        return parse_graph(fh.read(), dim_override=dim)


def _load_phi(path, g):
    if path is None:
        return default_test_form(g)
    with open(path) as fh:
        try:
            data = json.load(fh)
        except ValueError as exc:
            raise ParseError("bad test form JSON: %s" % exc)
    return TestForm.from_dict(data)


def _config(rtol, atol, max_evals, threads):
    if threads is None:
        raw = os.environ.get("HOLOFEYN_THREADS", "1")
        try:
            threads = int(raw)
        except ValueError:
            raise ParseError("HOLOFEYN_THREADS=%r is not an integer" % raw)
    return QuadratureConfig(rtol=rtol, atol=atol, max_evals=max_evals,
                            threads=threads)


def _guard(body):
    try:
        return body()
    except ParseError as exc:
        click.echo("parse error: %s" % exc, err=True)
        raise SystemExit(1)
    except NonConvergence as exc:
        click.echo("did not converge: %s" % exc, err=True)
        raise SystemExit(3)
    except AssertionError as exc:
        click.echo("identity violated: %s" % exc, err=True)
        raise SystemExit(2)
    except HolofeynError as exc:
        click.echo("invalid input: %s" % exc, err=True)
        raise SystemExit(1)
    except OSError as exc:
        click.echo("cannot read input: %s" % exc, err=True)
        raise SystemExit(1)


def _common(fn):
    fn = click.option("--output", type=click.Choice(["json", "csv", "text"]),
                      default="text", help="report format")(fn)
    fn = click.option("--d", "dim", type=int, default=None,
                      help="override the dimension of the graph file")(fn)
    fn = click.option("--graph", "graph_path", required=True,
                      help="graph description file")(fn)
    return fn


def _quadopts(fn):
    fn = click.option("--threads", type=int, default=None,
                      help="worker threads (default: HOLOFEYN_THREADS)")(fn)
    fn = click.option("--max-evals", type=int, default=2000000)(fn)
    fn = click.option("--atol", type=float, default=1e-12)(fn)
    fn = click.option("--rtol", type=float, default=1e-6)(fn)
    return fn


@click.group()
def main():
    """Workbench for holomorphic graph integrals in Schwinger form."""


### symbolic reports

@main.command()
@_common
def classify(graph_path, dim, output):
    """Laman verdict, sparsity witness, and collapse certificate."""
    def body():
        g = _load_graph(graph_path, dim)
        res = is_laman(g, g.dim)
        van = anomaly_vanishes_exactly(g)
        _emit({"d": g.dim,
               "laman": res.is_laman,
               "witness": (None if res.witness is None
                           else list(res.witness.indices)),
               "tight_count": res.equality_holds,
               "collapse_vanishes": van.vanishes,
               "radial_power": van.power}, output)
    _guard(body)


@main.command()
@_common
def kirchhoff(graph_path, dim, output):
    """The spanning tree polynomial, checked against enumeration."""
    def body():
        g = _load_graph(graph_path, dim)
        k = kirchhoff_polynomial(g)
        tvars = t_variables(g.n_edges)
        acc = Polynomial.zero(tvars)
        count = 0
        for tree in spanning_trees(g):
            exp = [0] * g.n_edges
            for e in tree.complement_indices():
                exp[e] = 1
            acc = acc + Polynomial.monomial(tvars, exp, 1)
            count += 1
        assert acc == k, "tree enumeration disagrees with the determinant"
        _emit({"kirchhoff": str(k), "trees": count, "identity": "ok"},
              output)
    _guard(body)


@main.command()
@_common
def minverse(graph_path, dim, output):
    """Exact inverse of the weighted Laplacian via the cut formula."""
    def body():
        g = _load_graph(graph_path, dim)
        inv = m_inverse(g)
        rows = [{"row": i + 1, "entries": [str(e) for e in row]}
                for i, row in enumerate(inv)]
        _emit({"size": len(inv), "identity": "ok", "matrix": rows}, output)
    _guard(body)


@main.command()
@_common
def dinverse(graph_path, dim, output):
    """Exact d^{-1} table, checked against the two-cut formula."""
    def body():
        g = _load_graph(graph_path, dim)
        dinv = d_inverse(g)
        rows = [{"edge": e + 1, "entries": [str(x) for x in row]}
                for e, row in enumerate(dinv)]
        _emit({"edges": len(dinv), "identity": "ok", "table": rows}, output)
    _guard(body)


@main.command()
@_common
def corners(graph_path, dim, output):
    """Leading rho-degree of the tree polynomial at every corner.

    For each connected edge subset the minimum rho-power after t_e ->
    rho xi_e must equal the first Betti number of the subgraph, with a
    nonzero leading coefficient."""
    def body():
        g = _load_graph(graph_path, dim)
        k = kirchhoff_polynomial(g)
        idxs = sorted(tuple(i for i in range(g.n_edges) if mask >> i & 1)
                      for mask in _connected_edge_subsets(g))
        rows = []
        for idx in idxs:
            sub = EdgeSubset(g, idx)
            parts = corner_expand(k, sub)
            deg = parts[0][0]
            assert not parts[0][1].is_zero()
            b = first_betti(sub)
            assert deg == b, "corner degree %d != betti %d on %s" \
                % (deg, b, idx)
            rows.append({"subset": list(idx), "min_rho_degree": deg,
                         "betti": b})
        _emit({"subsets": len(rows), "identity": "ok", "corners": rows},
              output)
    _guard(body)


### evaluation

@main.command(name="eval")
@_common
@_quadopts
@click.option("--phi", "phi_path", default=None,
              help="test form JSON (default: the graph's generic form)")
@click.option("--eps", type=float, default=0.0,
              help="inner cutoff; 0 integrates the corner exactly")
@click.option("--L", "length", type=float, default=1.0,
              help="outer cutoff")
@click.option("--mc", is_flag=True, help="use the Monte Carlo oracle")
@click.option("--samples", type=int, default=100000)
@click.option("--seed", type=int, default=0)
def eval_cmd(graph_path, dim, output, rtol, atol, max_evals, threads,
             phi_path, eps, length, mc, samples, seed):
    """Evaluate the regularized graph integral over [eps, L]^m."""
    def body():
        g = _load_graph(graph_path, dim)
        phi = _load_phi(phi_path, g)
        cfg = _config(rtol, atol, max_evals, threads)
        if mc:
            res = mc_oracle_W(g, None, phi, eps if eps > 0 else 0.1,
                              length, samples=samples, seed=seed,
                              threads=cfg.threads)
            _emit({"value": _pair(res.value), "error": res.error,
                   "evaluations": res.evaluations, "samples": samples,
                   "seed": seed}, output)
        else:
            res = evaluate_W(g, None, phi, eps, length, cfg)
            _emit({"value": _pair(res.value), "error": res.error,
                   "evaluations": res.evaluations}, output)
    _guard(body)


@main.command(name="mc-oracle")
@_common
@click.option("--phi", "phi_path", default=None,
              help="test form JSON (default: the graph's generic form)")
@click.option("--eps", type=float, default=0.1)
@click.option("--L", "length", type=float, default=1.0)
@click.option("--samples", type=int, default=100000)
@click.option("--seed", type=int, default=0)
@click.option("--threads", type=int, default=None)
def mc_oracle(graph_path, dim, output, phi_path, eps, length, samples,
              seed, threads):
    """Position-space Monte Carlo estimate, independent of the
    Gaussian reduction."""
    def body():
        g = _load_graph(graph_path, dim)
        phi = _load_phi(phi_path, g)
        cfg = _config(1e-6, 1e-12, 1, threads)
        res = mc_oracle_W(g, None, phi, eps, length, samples=samples,
                          seed=seed, threads=cfg.threads)
        _emit({"value": _pair(res.value), "error": res.error,
               "samples": samples, "seed": seed}, output)
    _guard(body)


### boundary operators

@main.command()
@_common
@_quadopts
@click.option("--phi", "phi_path", default=None,
              help="also apply the operator to this test form")
def anomaly(graph_path, dim, output, rtol, atol, max_evals, threads,
            phi_path):
    """Vanishing certificate, or the collapse operator of a Laman
    graph as exact momentum monomials."""
    def body():
        g = _load_graph(graph_path, dim)
        van = anomaly_vanishes_exactly(g)
        if van.vanishes:
            _emit({"vanishes": True, "power": van.power,
                   "witness": (None if van.witness is None
                               else list(van.witness.indices))}, output)
            return
        cfg = _config(rtol, atol, max_evals, threads)
        sym = anomaly_symbol(g, cfg=cfg)
        report = {"vanishes": False, "order": sym.order,
                  "coefficients": sym.to_dict()["coefficients"],
                  "error": sym.error}
        if phi_path is not None:
            phi = _load_phi(phi_path, g)
            report["applied"] = _pair(o_apply(sym, phi))
            report["face"] = _pair(face_integral(g, None, phi, cfg).value)
        _emit(report, output)
    _guard(body)


@main.command(name="quadratic-check")
@_common
@_quadopts
@click.option("--phi", "phi_path", default=None,
              help="test form JSON (default: the graph's generic form)")
@click.option("--tol", type=float, default=1e-4,
              help="relative residual tolerance")
def quadratic_check(graph_path, dim, output, rtol, atol, max_evals,
                    threads, phi_path, tol):
    """Signed corner pairings over Laman subgraphs and their
    cancellation."""
    def body():
        g = _load_graph(graph_path, dim)
        phi = _load_phi(phi_path, g)
        cfg = _config(rtol, atol, max_evals, threads)
        res = quadratic_residual(g, None, phi, cfg)
        scale = max((abs(t.value) for t in res.terms), default=0.0)
        rel = abs(res.value) / scale if scale else 0.0
        terms = [{"subgraph": list(t.indices), "sign": t.sign,
                  "value": _pair(t.value), "magnitude": abs(t.value)}
                 for t in res.terms]
        assert rel <= tol, "quadratic residual %g exceeds %g" % (rel, tol)
        _emit({"residual": _pair(res.value), "scale": scale,
               "relative": rel, "tolerance": tol, "identity": "ok",
               "terms": terms}, output)
    _guard(body)


@main.command(name="boundary-decay")
@_common
@_quadopts
@click.option("--phi", "phi_path", default=None,
              help="test form JSON (default: the graph's generic form)")
@click.option("--lengths", default="1,2,4,8",
              help="comma separated outer cutoffs")
def boundary_decay(graph_path, dim, output, rtol, atol, max_evals,
                   threads, phi_path, lengths):
    """Magnitudes of the outer faces t_e = L as the cutoff grows."""
    def body():
        g = _load_graph(graph_path, dim)
        phi = _load_phi(phi_path, g)
        cfg = _config(rtol, atol, max_evals, threads)
        try:
            ls = [float(x) for x in lengths.split(",") if x.strip()]
        except ValueError:
            raise ParseError("bad --lengths %r" % lengths)
        if not ls:
            raise ParseError("bad --lengths %r" % lengths)
        mags = outer_boundary_decay(g, None, phi, lengths=ls, cfg=cfg)
        decreasing = all(a > b for a, b in zip(mags, mags[1:]))
        assert decreasing or not any(mags), \
            "outer boundary magnitudes fail to decay: %s" % (mags,)
        _emit({"lengths": ls, "magnitudes": list(mags),
               "decreasing": decreasing}, output)
    _guard(body)


if __name__ == "__main__":
    main()
