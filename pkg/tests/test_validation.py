import numpy as np
import pytest

from inequality_suite import check_hierarchy, check_main_inequality
from monotone_functions import CLASSICAL, WY, asymmetric_kernel
from validation import (
    HermiticityError,
    ValidationError,
    check_hermitian,
    check_square,
    erratum_evidence,
    validate,
)


def _hierarchy_records(D, obs, seed=0):
    return [dict(report.to_dict(), seed=seed, trial=0) for report in check_hierarchy(D, WY, obs, seed=seed)]


def test_clean_records_have_no_findings(qubit_state, qubit_pair):
    assert validate(_hierarchy_records(qubit_state, qubit_pair)) == []


def test_hierarchy_conflict(random_instances):
    """
    Tests that the validation harness flags a hierarchy conflict when the
    recorded det Cov drops below det qCov^s for the same instance, even though
    each record on its own is self-consistent.
    """
    D, obs = random_instances[2]
    records = _hierarchy_records(D, obs)
    tampered = records[0]
    det_s = records[1]["lhs"]
    tampered["lhs"] = det_s / 2.0
    tampered["margin"] = tampered["lhs"] - tampered["rhs"]
    tampered["verdict"] = "PASS" if tampered["margin"] >= -tampered["tol_det"] else "FAIL"

    findings = validate(records)

    conflicts = [f for f in findings if f["rule_name"] == "Hierarchy_Transitivity"]
    assert conflicts, f"Validation harness did not flag the hierarchy conflict. Findings: {findings}"
    assert conflicts[0]["status"] == "CONFLICT"
    assert "wy" in conflicts[0]["details"]


def test_margin_and_verdict_consistency(qubit_state, qubit_pair):
    record = check_main_inequality(qubit_state, CLASSICAL, asymmetric_kernel(WY), qubit_pair).to_dict()
    bad_margin = dict(record, margin=record["margin"] + 1.0)
    bad_verdict = dict(record, verdict="FAIL")
    findings = validate([bad_margin, bad_verdict])
    rules = sorted(f["rule_name"] for f in findings)
    assert rules == ["Margin_Consistency", "Verdict_Tolerance"]
    assert all(f["status"] == "INCONSISTENT" for f in findings)


def test_ill_conditioned_pass_is_not_flagged():
    record = {"name": "main", "lhs": 1.0, "rhs": 1.1, "margin": 1.0 - 1.1, "tol_det": 1e-9,
              "verdict": "PASS", "warnings": ["ill-conditioned: cond(G1) = 1e+13"]}
    assert validate([record]) == []
    assert validate([dict(record, warnings=[])])[0]["rule_name"] == "Verdict_Tolerance"


def test_erratum_evidence(qubit_state, qubit_pair):
    record = dict(check_main_inequality(qubit_state, CLASSICAL, asymmetric_kernel(WY), qubit_pair).to_dict(),
                  seed=3)
    evidence = erratum_evidence([{"verdict": "PASS", "margin_printed": None}, record])
    assert evidence is not None
    assert evidence["seed"] == 3
    assert evidence["margin_printed"] < 0 <= evidence["margin"] + evidence["tol_det"]
    assert erratum_evidence([dict(record, verdict="FAIL")]) is None


def test_guards():
    with pytest.raises(ValidationError) as excinfo:
        check_square(np.ones((2, 3)), "density")
    assert excinfo.value.invariant == "square"
    with pytest.raises(ValidationError) as excinfo:
        check_square(np.array([[1.0, np.nan], [0.0, 1.0]]), "observables[1]")
    assert excinfo.value.field == "observables[1][0][1]"
    with pytest.raises(HermiticityError) as excinfo:
        check_hermitian(np.array([[1.0, 2.0], [0.0, 1.0]]), "observables[0]")
    assert str(excinfo.value).startswith("hermitian at observables[0]")
