BASE = "Numerical verification only - not a proof. Every verdict holds for the sampled instance and the stated tolerances; a PASS is evidence, a FAIL with a replayable seed is a counterexample candidate to be re-checked in higher precision."

SAMPLED_HYPOTHESIS = """Pointwise hypotheses of the form "for all t > 0" or "for all x, y > 0" were checked on the spectrum pairs of D plus a log-spaced grid, not proven.
A hypothesis that passes on the grid can still fail between grid points; HYPOTHESIS_NOT_MET records carry the worst sampled point as a witness."""

NON_REGULAR = """At least one function in this run has f(0) = 0 (Kubo-Mori, or Wigner-Yanase-Dyson with beta outside (0, 1)).
Its asymmetric and symmetric covariances vanish identically, so the corresponding lower bounds are the trivial bound 0."""

ILL_CONDITIONED = """Some covariance matrices had condition number above 1e12. Determinants of such matrices carry little relative accuracy; these records are flagged WARN instead of failed."""

REMAINDER_ERRATUM = """The main inequality uses the remainder with base det(G2), as produced by the Minkowski step. The variant with base det(G1) is recorded as remainder_printed / margin_printed; it is not a valid bound in general."""

def build_disclaimer(sampled_hypothesis: bool = False, has_non_regular: bool = False, has_ill_conditioned: bool = False, has_remainder: bool = False) -> str:
    """
    Builds the caveat block printed under CLI results and stored with sweep provenance.
    """
    parts = [BASE]

    if sampled_hypothesis:
        parts.append(SAMPLED_HYPOTHESIS)

    if has_non_regular:
        parts.append(NON_REGULAR)

    if has_ill_conditioned:
        parts.append(ILL_CONDITIONED)

    if has_remainder:
        parts.append(REMAINDER_ERRATUM)

    return "\n\n".join(parts)
