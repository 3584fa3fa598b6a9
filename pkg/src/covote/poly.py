"""Lagrange interpolation over the scalar field Z_q.

Share points live at small integer x-coordinates: the hidden secret at
x = 0, per-holder shares at x = 1..n, published alpha evaluations at
x = n+1..2n-t+1.
"""

from __future__ import annotations

from dataclasses import dataclass

from .group import ORDER, Scalar


@dataclass(frozen=True)
class SharePoint:
    x: Scalar
    y: Scalar


def interpolate(points: list[SharePoint], x_eval: Scalar, modulus: int = ORDER) -> Scalar:
    """Evaluate at ``x_eval`` the unique polynomial of degree < len(points)
    passing through ``points``.

    Raises ValueError on an empty list or duplicate x-coordinates.
    """
    if not points:
        raise ValueError("at least one point required")
    xs = [p.x % modulus for p in points]
    if len(set(xs)) != len(xs):
        raise ValueError("duplicate x coordinates")

    x_eval %= modulus
    total = 0
    for i, point in enumerate(points):
        num = 1
        den = 1
        for j, xj in enumerate(xs):
            if j == i:
                continue
            num = num * ((x_eval - xj) % modulus) % modulus
            den = den * ((xs[i] - xj) % modulus) % modulus
        total = (total + point.y * num * pow(den, -1, modulus)) % modulus
    return total


def evaluate_coefficients(coefficients: list[Scalar], x: Scalar, modulus: int = ORDER) -> Scalar:
    """Horner evaluation of a coefficient-form polynomial (lowest degree
    first).  Used by tests as the independent oracle for interpolate()."""
    acc = 0
    for coeff in reversed(coefficients):
        acc = (acc * x + coeff) % modulus
    return acc
