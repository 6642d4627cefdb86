import numpy as np

from disclaimers import BASE, NON_REGULAR, REMAINDER_ERRATUM, build_disclaimer
from versioning import finalize_provenance, get_initial_provenance, instance_digest, provenance_hash


def test_provenance_is_deterministic():
    records = [{"name": "main", "margin": 0.5, "verdict": "PASS"}]
    first = finalize_provenance(get_initial_provenance({"seed": 1}), records)
    second = finalize_provenance(get_initial_provenance({"seed": 1}), list(records))
    assert first == second
    assert first["record_count"] == 1
    assert first["remainder_convention"] == "det(G2)"
    assert not any("time" in key for key in first)


def test_provenance_hash_ignores_key_order():
    assert provenance_hash([{"a": 1, "b": 2}]) == provenance_hash([{"b": 2, "a": 1}])
    assert provenance_hash([{"a": 1}]) != provenance_hash([{"a": 2}])


def test_instance_digest_depends_on_every_matrix():
    D = np.diag([0.7, 0.3])
    X = np.array([[0, 1], [1, 0]])
    assert instance_digest(D, [X]) == instance_digest(D.astype(complex), [X.astype(complex)])
    assert instance_digest(D, [X]) != instance_digest(D, [X, X])


def test_disclaimer_parts():
    assert build_disclaimer() == BASE
    text = build_disclaimer(has_non_regular=True, has_remainder=True)
    assert text.split("\n\n")[0] == BASE
    assert NON_REGULAR in text and REMAINDER_ERRATUM in text
