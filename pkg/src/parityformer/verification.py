"""Oracles and auditors for the parity construction."""
from __future__ import annotations

import itertools
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import kernels
from .construction import DEFAULT_LAYOUT, ConstructionParams, params_from_spec
from .encoding import alpha_fraction, temperature
from .errors import ConfigurationError, IndeterminateDecision
from .interpreter import TransformerSpec, parse_bits, run_transformer
from .scalar import FLOAT64, MPBackend
from .semantic import semantic_coeffs, semantic_decide

# float64 suffices for the coefficient argmax up to this length
FLOAT_AUDIT_LIMIT = 300


@dataclass
class VerificationReport:
    claim: str
    range_tested: str
    passed: bool
    witness: object = None
    worst: object = None
    checked: int = 0
    runtime: float = 0.0
    details: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.passed and self.witness is None:
            raise ValueError("a failing report must carry a witness")

    def as_text(self, include_runtime=True):
        status = "PASS" if self.passed else "FAIL"
        line = f"[{status}] {self.claim} ({self.range_tested}; {self.checked} checked)"
        if self.worst is not None:
            line += f" worst={self.worst!r}"
        if self.witness is not None:
            line += f" witness={self.witness!r}"
        if include_runtime:
            line += f" in {self.runtime:.2f}s"
        return line

    def as_record(self, include_runtime=True):
        rec = {
            "claim": self.claim,
            "range": self.range_tested,
            "passed": self.passed,
            "witness": self.witness,
            "worst": self.worst,
            "checked": self.checked,
            "details": self.details,
        }
        if include_runtime:
            rec["runtime"] = self.runtime
        return rec


def parity_oracle(bits):
    """True iff the word has an even number of ones."""
    bits = parse_bits(bits)
    if not bits:
        raise ValueError("empty input not in model scope")
    return sum(bits) % 2 == 0


def max_row_error(trace):
    """Largest |sum(weight row) - 1| across a trace, in units of float64 eps."""
    worst = 0.0
    for rec in trace.layers:
        for row in rec.weights:
            worst = max(worst, abs(math.fsum(float(w) for w in row) - 1.0))
    return worst / FLOAT64.eps


def _as_runner(runner):
    if isinstance(runner, TransformerSpec):
        spec = runner
        return lambda bits: run_transformer(spec, bits)
    return runner


def _check_words(runner, words):
    """(count, first failure or None, min margin, its word, max row error)."""
    run = _as_runner(runner)
    failure = None
    min_margin, min_word = math.inf, None
    row_err = 0.0
    count = 0
    for bits in words:
        word = "".join(map(str, bits))
        count += 1
        try:
            result = run(bits)
        except IndeterminateDecision:
            if failure is None:
                failure = (word, "indeterminate")
            continue
        if result.accepted != parity_oracle(bits):
            if failure is None:
                failure = (word, result.decision.value)
            continue
        m = float(result.margin)
        if m < min_margin:
            min_margin, min_word = m, word
        row_err = max(row_err, max_row_error(result.trace))
    return count, failure, min_margin, min_word, row_err


def _words_of_length(n):
    return itertools.product((0, 1), repeat=n)


def _merge(parts, claim, range_tested, started):
    count = 0
    failure = None
    min_margin, min_word = math.inf, None
    row_err = 0.0
    for c, f, m, w, r in parts:
        count += c
        if failure is None and f is not None:
            failure = f
        if m < min_margin:
            min_margin, min_word = m, w
        row_err = max(row_err, r)
    return VerificationReport(
        claim=claim,
        range_tested=range_tested,
        passed=failure is None,
        witness=None if failure is None else failure[0],
        worst=min_margin,
        checked=count,
        runtime=time.perf_counter() - started,
        details={
            "min_margin_input": min_word,
            "max_row_error_eps": row_err,
            "failure_decision": None if failure is None else failure[1],
        },
    )


def _check_length(spec, n):
    return _check_words(spec, _words_of_length(n))


def exhaustive_verify(runner, n_max, workers=1):
    """Run every word of length 1..n_max and compare with the parity oracle.

    ``runner`` is a ``TransformerSpec`` or a callable returning a run result.
    With ``workers > 1`` lengths are farmed out to processes (spec runners
    only); results are merged in length order, so reports are identical.
    """
    if n_max < 1:
        raise ValueError("n_max must be at least 1")
    started = time.perf_counter()
    lengths = range(1, n_max + 1)
    if workers > 1 and isinstance(runner, TransformerSpec):
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_check_length, itertools.repeat(runner), lengths))
    else:
        parts = [_check_words(runner, _words_of_length(n)) for n in lengths]
    return _merge(parts, "exhaustive parity agreement", f"n=1..{n_max}", started)


def random_verify(runner, count, length, seed=0):
    """Check ``count`` uniformly random words of one length."""
    if length < 1:
        raise ValueError("length must be at least 1")
    started = time.perf_counter()
    rng = np.random.default_rng(seed)
    words = [tuple(int(b) for b in rng.integers(0, 2, size=length)) for _ in range(count)]
    part = _check_words(runner, words)
    return _merge([part], "random parity agreement", f"{count} words, n={length}, seed={seed}", started)


@dataclass
class Lemma2Audit:
    """Exact per-position breakdown of the argmax argument at one (n, sigma)."""

    n: int
    sigma: int
    alpha: Fraction
    records: list
    min_ratio_c: Fraction
    min_ratio_lambda: Fraction
    min_ratio_rho: Fraction
    argmax: int
    unique: bool


def lemma2_record(n, sigma, params=None):
    """b_i, c_i, lambda and the rho bound in exact rationals, plus float a_i."""
    params = params or ConstructionParams()
    if not 1 <= sigma <= n:
        raise ValueError("need 1 <= sigma <= n")
    a = alpha_fraction(params.alpha)
    lam = -2 * a * a / (sigma * n)
    rho_bound = a ** 3 / Fraction(sigma) ** 3
    coeffs = semantic_coeffs(n, sigma, params)
    records = []
    for i in range(1, n + 1):
        b = a / i - a / sigma
        c = a * a / sigma ** 2 - a * a / i ** 2
        rec = {"i": i, "b": b, "c": c, "lambda": lam, "rho_bound": rho_bound, "a": coeffs[i - 1]}
        if i != sigma:
            rec["ratio_c"] = abs(b) / abs(c)
            rec["ratio_lambda"] = abs(b) / abs(lam)
            rec["ratio_rho"] = abs(b) / rho_bound
        records.append(rec)
    others = [r for r in records if r["i"] != sigma]
    best = max(range(n), key=lambda k: coeffs[k]) + 1
    unique = all(coeffs[sigma - 1] > r["a"] for r in others)

    def lowest(key):
        return min((r[key] for r in others), default=None)

    return Lemma2Audit(
        n=n,
        sigma=sigma,
        alpha=a,
        records=records,
        min_ratio_c=lowest("ratio_c"),
        min_ratio_lambda=lowest("ratio_lambda"),
        min_ratio_rho=lowest("ratio_rho"),
        argmax=best,
        unique=unique,
    )


_FAMILIES = ("c", "lambda", "rho")


def _argmax_failure_highprec(n, alpha_params, backend):
    for sigma in range(1, n + 1):
        a = semantic_coeffs(n, sigma, alpha_params, backend)
        top = a[sigma - 1]
        if any(not top > a[i] for i in range(n) if i != sigma - 1):
            return sigma, max(range(n), key=lambda k: a[k]) + 1
    return None


def lemma2_audit(n_max, params=None, highprec_above=FLOAT_AUDIT_LIMIT, backend=None):
    """Check the three proof ratios exceed 10 and the coefficient argmax is sigma.

    Ratios are compared in exact integer arithmetic, so the analytic floors
    1/(2 alpha) and 1/(2 alpha^2) are checked without rounding slack.  The
    argmax uses float64 up to ``highprec_above`` and ``backend`` (default
    113-bit mpmath) beyond it.
    """
    params = params or ConstructionParams()
    if n_max < 2:
        raise ValueError("n_max must be at least 2")
    started = time.perf_counter()
    frac = alpha_fraction(params.alpha)
    num, den = frac.numerator, frac.denominator
    hp = backend or MPBackend(113)

    min_ratio = [[math.inf, None] for _ in _FAMILIES]
    gt10 = [0, 0, 0]
    floor = [0, 0, 0]
    argmax_fail = 0
    gap_rel = [math.inf, None]
    gap_abs = [math.inf, None]
    witness = None
    checked = 0
    for n in range(2, n_max + 1):
        scan = kernels.lemma2_scan(n, num, den, params.alpha)
        checked += n * (n - 1)
        for f in range(3):
            v, s, i = scan["min_ratio"][f]
            if v < min_ratio[f][0]:
                min_ratio[f] = [v, (n, s, i)]
            for counts, key, label in ((gt10, "gt10_fail", "ratio<=10"), (floor, "floor_fail", "below floor")):
                cnt, s, i = scan[key][f]
                if cnt:
                    counts[f] += cnt
                    if witness is None:
                        witness = {"check": f"{_FAMILIES[f]} {label}", "n": n, "sigma": s, "i": i}
        if n > highprec_above:
            bad = _argmax_failure_highprec(n, params, hp)
            am = [0, 0, 0] if bad is None else [1, bad[0], bad[1]]
        else:
            am = scan["argmax_fail"]
        if am[0]:
            argmax_fail += am[0]
            if witness is None:
                witness = {"check": "argmax", "n": n, "sigma": am[1], "argmax": am[2]}
        for slot, key in ((gap_rel, "min_gap_rel"), (gap_abs, "min_gap_abs")):
            v, s, i = scan[key]
            if v < slot[0]:
                slot[0], slot[1] = v, (n, s, i)

    passed = not any(gt10) and not any(floor) and argmax_fail == 0
    details = {
        "alpha": str(frac),
        "min_ratio": {fam: {"value": r[0], "at": r[1]} for fam, r in zip(_FAMILIES, min_ratio)},
        "floors": {"c": float(1 / (2 * frac)), "lambda": float(1 / (2 * frac)),
                   "rho": float(1 / (2 * frac * frac))},
        "ratio_le_10": dict(zip(_FAMILIES, gt10)),
        "below_floor": dict(zip(_FAMILIES, floor)),
        "argmax_failures": argmax_fail,
        "min_gap_over_b": {"value": gap_rel[0], "at": gap_rel[1]},
        "min_gap_over_floor": {"value": gap_abs[0], "at": gap_abs[1]},
        "highprec_above": highprec_above,
    }
    return VerificationReport(
        claim="coefficient argmax at sigma (proof ratios > 10)",
        range_tested=f"n=2..{n_max}, alpha={frac}",
        passed=passed,
        witness=witness,
        worst=min(r[0] for r in min_ratio),
        checked=checked,
        runtime=time.perf_counter() - started,
        details=details,
    )


def margin_profile(n, T=None, params=None, target=1 / 3):
    """Worst |theta - (-1)^sigma| over sigma = 1..n at temperature T."""
    params = params or ConstructionParams()
    if n < 1:
        raise ValueError("n must be at least 1")
    T = params.temperature(n) if T is None else T
    if not T > 0:
        raise ValueError("temperature must be positive")
    started = time.perf_counter()
    worst, sigma = kernels.margin_sweep(n, params.alpha, float(T))
    passed = worst <= target
    return VerificationReport(
        claim=f"margin |theta - (-1)^sigma| <= {target:.6g}",
        range_tested=f"n={n}, sigma=1..{n}, T={T}",
        passed=passed,
        witness=None if passed else {"n": n, "sigma": sigma, "deviation": worst},
        worst=worst,
        checked=n,
        runtime=time.perf_counter() - started,
        details={"worst_sigma": sigma, "temperature": T},
    )


class CalibrationError(RuntimeError):
    pass


def calibrate_temperature(n, target=1 / 3, params=None, lower=1.0, upper=None, rel=1e-3):
    """Smallest temperature (to relative precision ``rel``) meeting ``target``.

    Assumes the deviation decreases with temperature, which holds on the
    bracket in practice.  Returns ``lower`` when it already suffices.
    """
    params = params or ConstructionParams()
    if n < 1:
        raise ValueError("n must be at least 1")
    if not 0 < target < 1:
        raise ValueError("target must lie in (0, 1)")

    def deviation(T):
        return kernels.margin_sweep(n, params.alpha, float(T))[0]

    if deviation(lower) <= target:
        return lower
    upper = 4.0 * params.temperature(n) if upper is None else upper
    dev_hi = deviation(upper)
    if dev_hi > target:
        raise CalibrationError(
            f"bracket exhausted: deviation {dev_hi:.6g} > {target:.6g} at T={upper:.6g} "
            f"(n={n}, lower={lower:.6g})"
        )
    lo, hi = lower, upper
    while hi / lo > 1 + rel:
        mid = math.sqrt(lo * hi)
        if deviation(mid) <= target:
            hi = mid
        else:
            lo = mid
    return hi


def _rel_dev(x, y):
    x, y = float(x), float(y)
    if x == y:
        return 0.0
    if y == 0.0:
        return math.inf
    return abs(x - y) / abs(y)


def equivalence_check(spec, bits, tolerance=1e-6, params=None, layout=DEFAULT_LAYOUT, backend=FLOAT64):
    """Compare the realized run's registers with the closed-form pipeline."""
    if spec.d != layout.dim or len(spec.layers) != 3:
        raise ConfigurationError(
            f"layout mismatch: spec has d={spec.d} and {len(spec.layers)} layers, "
            f"layout expects d={layout.dim} and 3 layers"
        )
    started = time.perf_counter()
    params = params or params_from_spec(spec)
    bits = parse_bits(bits)
    word = "".join(map(str, bits))
    run = run_transformer(spec, bits, backend)
    _, sem = semantic_decide(bits, params, backend)
    L = layout
    post = [rec.output for rec in run.trace.layers]
    n = len(bits)
    pairs = []
    for pos in range(n):
        pairs.append(("lnn", pos, post[0][pos, L.LNN], sem.lnn))
        pairs.append(("guard", pos, post[0][pos, L.GUARD], sem.guard))
        pairs.append(("gamma", pos, post[1][pos, L.GAMMA], sem.gamma))
        if sem.sigma:
            pairs.append(("coeff", pos, post[1][pos, L.ACOEFF], sem.coeffs[pos]))
            pairs.append(("theta", pos, post[2][pos, L.THETA], sem.theta))
    pairs.append(("final", 0, post[2][0, L.OUT], sem.final))

    worst, where = 0.0, None
    for name, pos, realized, reference in pairs:
        dev = _rel_dev(realized, reference)
        if dev > worst or where is None:
            worst, where = dev, {"input": word, "quantity": name, "position": pos + 1,
                                 "realized": float(realized), "reference": float(reference)}
    passed = worst <= tolerance
    return VerificationReport(
        claim=f"realized registers match closed forms within {tolerance:g}",
        range_tested=f"input {word}",
        passed=passed,
        witness=None if passed else where,
        worst=worst,
        checked=len(pairs),
        runtime=time.perf_counter() - started,
        details={"worst_at": where, "row_error_eps": max_row_error(run.trace)},
    )
