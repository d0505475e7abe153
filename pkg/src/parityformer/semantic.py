"""Closed-form reference pipeline for the parity construction.

Computes the same intermediates the transformer materialises (ln n, gamma,
the coefficients a_i, theta, the guard and the output) straight from their
formulas, without any matrices.
"""
from __future__ import annotations

from dataclasses import dataclass

from .construction import ConstructionParams
from .encoding import alpha_text, temperature as temperature_schedule
from .errors import IndeterminateDecision
from .interpreter import Decision, parse_bits
from .scalar import FLOAT64


@dataclass(frozen=True)
class SemanticTrace:
    n: int
    sigma: int
    lnn: object
    gamma: object
    coeffs: tuple
    temperature: int
    theta: object
    guard: object
    final: object


def _alpha(params, backend):
    return backend.scalar(alpha_text(params.alpha))


def _count(bits):
    bits = parse_bits(bits)
    if not bits:
        raise ValueError("empty input not in model scope")
    return len(bits), sum(bits)


def gamma_closed(n, sigma, params, backend=FLOAT64):
    a = _alpha(params, backend)
    s = backend.scalar(sigma)
    return s / (s + (n - sigma) * (a / n))


def semantic_gamma(bits, params=None, backend=FLOAT64):
    """sigma / (sigma + (n - sigma) alpha/n); zero when there are no ones."""
    params = params or ConstructionParams()
    n, sigma = _count(bits)
    return gamma_closed(n, sigma, params, backend)


def gamma_softmax_form(bits, params=None, backend=FLOAT64):
    """gamma as the literal attention average with scores (delta - ln n)(1 - x_i)."""
    params = params or ConstructionParams()
    bits = parse_bits(bits)
    n = len(bits)
    delta = params.delta(backend)
    lnn = backend.log(backend.scalar(n))
    w = backend.softmax([(delta - lnn) * (1 - x) for x in bits])
    return backend.fsum(wi * x for wi, x in zip(w, bits))


def semantic_coeffs(n, sigma, params=None, backend=FLOAT64):
    """a_i = -|gamma - 1 + (alpha/i - alpha/n) - (alpha^2/i^2 + alpha^2/n^2)|."""
    params = params or ConstructionParams()
    if not 1 <= sigma <= n:
        raise ValueError("Lemma 2 precondition violated: need 1 <= sigma <= n")
    a = _alpha(params, backend)
    a2 = a * a
    gamma = gamma_closed(n, sigma, params, backend)
    out = []
    for i in range(1, n + 1):
        fi = backend.scalar(i)
        z = ((gamma - 1) + (a / fi - a / n)) - (a2 / (fi * fi) + a2 / (n * n))
        out.append(-abs(z))
    return tuple(out)


def semantic_theta(n, sigma, params=None, backend=FLOAT64, temperature=None):
    """Softmax(a * T) average of the signs (-1)^i."""
    params = params or ConstructionParams()
    coeffs = semantic_coeffs(n, sigma, params, backend)
    T = backend.scalar(temperature_schedule(n, params.alpha) if temperature is None else temperature)
    w = backend.softmax([c * T for c in coeffs])
    return backend.fsum(wi if i % 2 == 0 else -wi for i, wi in enumerate(w, start=1))


def semantic_decide(bits, params=None, backend=FLOAT64):
    params = params or ConstructionParams()
    n, sigma = _count(bits)
    T = temperature_schedule(n, params.alpha)
    guard = 1 / (2 * backend.scalar(n)) - backend.scalar(sigma) / n
    if sigma == 0:
        coeffs, theta, final = (), None, guard
    else:
        coeffs = semantic_coeffs(n, sigma, params, backend)
        theta = semantic_theta(n, sigma, params, backend)
        final = max(theta, guard)
    trace = SemanticTrace(
        n=n,
        sigma=sigma,
        lnn=backend.log(backend.scalar(n)),
        gamma=gamma_closed(n, sigma, params, backend),
        coeffs=coeffs,
        temperature=T,
        theta=theta,
        guard=guard,
        final=final,
    )
    if final > 0:
        return Decision.ACCEPT, trace
    if final < 0:
        return Decision.REJECT, trace
    raise IndeterminateDecision("indeterminate: semantic output is exactly zero")
