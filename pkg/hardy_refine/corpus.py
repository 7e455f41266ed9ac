"""Built-in function corpus and families.

Corpus entries are ordinary parsed expressions with declared tail behaviour
and whatever closed forms are known for them; the closed forms are used as
oracles by the test suites and as reference values in reports.
"""

import math
from dataclasses import dataclass, field

from hardy_refine.errors import ConfigError, PreconditionError
from hardy_refine.funcdsl import ZERO, Family, ScalarFn, from_text


@dataclass(frozen=True)
class CorpusEntry:
    """A named test function with its known integrals."""

    name: str
    expression: str
    tail: str  # exponential | algebraic
    # Closed forms keyed by quantity name, e.g. "int_f2" = ∫ f², "lhs_p2" = ∫ H².
    closed_forms: dict[str, float] = field(default_factory=dict)

    def function(self) -> ScalarFn:
        fn = from_text(self.expression)
        return ScalarFn(
            fn.source,
            fn.label,
            {"corpus": self.name, "tail": self.tail, "closed_forms": dict(self.closed_forms)},
        )


CORPUS: dict[str, CorpusEntry] = {
    entry.name: entry
    for entry in (
        CorpusEntry(
            "recip",
            "1/(t+1)",
            "algebraic",
            {
                "int_f2": 1.0,
                "lhs_p2": math.pi**2 / 3,
                "correction_p2": 2 - math.pi**2 / 6,
            },
        ),
        CorpusEntry(
            "exp",
            "exp(-t)",
            "exponential",
            {
                "int_f": 1.0,
                "int_f2": 0.5,
                "lhs_p2": 2 * math.log(2),
                "correction_p2": 1 - math.log(2),
            },
        ),
        CorpusEntry("texp", "t*exp(-t)", "exponential", {"int_f": 1.0, "int_f2": 0.25}),
        CorpusEntry("rat", "t/(1+t^2)", "algebraic", {"int_f2": math.pi / 4}),
        CorpusEntry(
            "cauchy",
            "1/(1+t^2)",
            "algebraic",
            {
                "int_f": math.pi / 2,
                "int_f2": math.pi / 4,
                "lhs_p2": math.pi * math.log(2),
            },
        ),
        CorpusEntry("recip2", "1/(t+1)^2", "algebraic", {"int_f": 1.0, "int_f2": 1 / 3}),
    )
}

# The five functions of the refinement-dominance acceptance grid.
DOMINANCE_CORPUS = ("recip", "exp", "texp", "rat", "cauchy")


def corpus_function(name: str) -> ScalarFn:
    """Look up a corpus entry by name."""
    try:
        return CORPUS[name].function()
    except KeyError:
        known = ", ".join(sorted(CORPUS))
        raise ConfigError(f"unknown corpus entry {name!r} (known: {known})") from None


def power_family(p: float, sign: str) -> ScalarFn:
    """Return t -> +t^p or t -> -t^p tagged with its expected verdict.

    The plus branch is consistent on every grid for p >= 2 and violated for
    1 < p < 2; the minus branch is consistent for 1 < p <= 2. Other
    combinations carry no expectation.
    """
    if p <= 1:
        raise PreconditionError(f"power family needs p > 1, got {p!r}")
    if sign not in ("plus", "minus"):
        raise PreconditionError(f"sign must be 'plus' or 'minus', got {sign!r}")

    if sign == "plus":
        expected = "consistent" if p >= 2 else "violated"
    else:
        expected = "consistent" if p <= 2 else None

    label = f"t^{p!r}" if sign == "plus" else f"-t^{p!r}"
    factor = 1.0 if sign == "plus" else -1.0
    return ScalarFn(Family("power", (float(p), factor)), label, {"expected": expected})


def resolve_function(spec: str) -> ScalarFn:
    """Resolve a --f argument: an expression, ``corpus:<name>`` or ``power:<p>:<sign>``."""
    spec = spec.strip()
    if spec.startswith("corpus:"):
        return corpus_function(spec.split(":", 1)[1])
    if spec.startswith("power:"):
        parts = spec.split(":")
        if len(parts) != 3:
            raise ConfigError(f"family tag must look like power:<p>:<plus|minus>, got {spec!r}")
        try:
            p = float(parts[1])
        except ValueError:
            raise ConfigError(f"invalid exponent in {spec!r}") from None
        return power_family(p, parts[2])
    if spec == "0":
        return ZERO
    return from_text(spec)
