"""Plain-text certificate reports.

The report opens with a `key: value` header block (one constant per line,
terminated by a blank line) that scripts can parse, followed by the
eigenvalue list and the per-trajectory ledger.
"""

from collections.abc import Sequence

from helictl.services.stability_cert import Certificate, ResidualBoundCheck, SweepResult


def _fmt(v: float) -> str:
    return f"{v:.17g}"


def parse_report_header(text: str) -> dict[str, str]:
    header: dict[str, str] = {}
    for line in text.splitlines():
        if not line.strip():
            break
        if line.startswith("#"):
            continue
        key, _, value = line.partition(":")
        header[key.strip()] = value.strip()
    return header


def render_certificate_report(
    scenario: str,
    cert: Certificate,
    sweep: SweepResult | None = None,
    residual: ResidualBoundCheck | None = None,
    labels: Sequence[str] | None = None,
) -> str:
    """Render a certificate and, when given, the Monte-Carlo sweep that checked it."""
    passed = (sweep is None or sweep.passed) and (residual is None or residual.passed)
    header = {
        "scenario": scenario,
        "status": "pass" if passed else "fail",
        "theta_d_rad": _fmt(cert.theta_d),
        "beta": _fmt(cert.beta),
        "kappa": _fmt(cert.kappa),
        "lambda1": _fmt(cert.lambda1),
        "gamma": _fmt(cert.gamma),
        "z0_max": _fmt(cert.z0_max),
        "gamma_self_consistent": str(cert.bound_holds(cert.z0_max)).lower(),
    }
    if residual is not None:
        header["residual_samples"] = str(residual.samples)
        header["residual_worst_ratio"] = _fmt(residual.worst_ratio)
    if sweep is not None:
        n = len(sweep.convergence)
        rates = sorted(c.decay_rate for c in sweep.convergence if c.decay_rate is not None)
        header["trajectories"] = str(n)
        header["bounded"] = f"{sum(t.passed for t in sweep.boundedness.trajectories)}/{n}"
        header["converged"] = f"{sum(c.passed for c in sweep.convergence)}/{n}"
        header["worst_max_norm"] = _fmt(sweep.boundedness.worst_max_norm)
        header["worst_margin"] = _fmt(sweep.boundedness.worst_margin)
        header["slowest_rate"] = _fmt(abs(cert.lambda1))
        if rates:
            header["median_fitted_rate"] = _fmt(rates[len(rates) // 2])

    lines = ["# helictl stability certificate"]
    lines += [f"{k}: {v}" for k, v in header.items()]
    lines.append("")
    lines.append("eigenvalues (descending real part):")
    for i, lam in enumerate(cert.eigenvalues, start=1):
        lines.append(f"  lambda_{i} = {lam.real:+.12g} {lam.imag:+.12g}j")
    lines.append("")
    lines.append(f"bound: beta*z0 + beta*kappa*gamma^2/|lambda1| <= gamma for z0 <= {cert.z0_max:.6g}")

    if sweep is not None:
        names = list(labels) if labels is not None else []
        names += [f"random-{i}" for i in range(len(names), len(sweep.convergence))]
        zero_rows = [i for i, t in enumerate(sweep.boundedness.trajectories) if t.z0_norm == 0.0]
        if zero_rows:
            lines.append("")
            lines.append("zero initial state:")
            for i in zero_rows:
                t = sweep.boundedness.trajectories[i]
                lines.append(f"  {names[i]}: max_norm {t.max_norm:.6g}, trivially bounded: {str(t.passed).lower()}")
        lines.append("")
        lines.append("ledger:")
        lines.append(f"  {'trajectory':<16} {'z0_norm':>13} {'max_norm':>13} {'bounded':>8} {'d_final':>13} {'rate':>9} {'converged':>9}")
        for name, b, c in zip(names, sweep.boundedness.trajectories, sweep.convergence):
            rate = f"{c.decay_rate:.4f}" if c.decay_rate is not None else "-"
            lines.append(
                f"  {name:<16} {b.z0_norm:>13.6e} {b.max_norm:>13.6e} {'pass' if b.passed else 'FAIL':>8} "
                f"{c.d_final:>13.6e} {rate:>9} {'pass' if c.passed else 'FAIL':>9}"
            )
    return "\n".join(lines) + "\n"
