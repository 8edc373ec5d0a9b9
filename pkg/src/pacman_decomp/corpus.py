"""Reference measures used across tests, acceptance checks and bundled data."""

from fractions import Fraction

from .measure import ProbabilityMeasure


def two_point():
    return ProbabilityMeasure.discrete([0, 1])


def uniform():
    return ProbabilityMeasure.uniform(0, 1)


def three_point():
    return ProbabilityMeasure.discrete([0, 1, 2])


def skewed_two_point():
    return ProbabilityMeasure.discrete([0, 1], [Fraction(1, 4), Fraction(3, 4)])


def mixed():
    return ProbabilityMeasure(
        atoms=[(0, Fraction(1, 5)), (1, Fraction(1, 10)), (3, Fraction(1, 5))],
        segments=[(Fraction(1, 2), 2, Fraction(1, 2))],
    )


def gapped():
    return ProbabilityMeasure(
        atoms=[(4, Fraction(2, 5))],
        segments=[(0, 1, Fraction(3, 10)), (2, Fraction(5, 2), Fraction(3, 10))],
    )


CORPUS = {
    "two_point": two_point,
    "uniform": uniform,
    "three_point": three_point,
    "skewed_two_point": skewed_two_point,
    "mixed": mixed,
    "gapped": gapped,
}


def corpus():
    """Fresh ``{name: measure}`` dict of the six reference measures."""
    return {name: build() for name, build in CORPUS.items()}
