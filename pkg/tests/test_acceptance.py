"""The 18 acceptance criteria at full scale, one printed PASS/FAIL line each."""
import pytest

from stoqlab import acceptance

# constants that provably fail on the stated range; details in the README
KNOWN = {
    "AC1": "lower sphere constant c_3 = 8 exceeds s_3(n)/n^2",
    "AC15": "surface-energy constant with max{...} fails on many regions",
}


def _param(i):
    cid = f"AC{i + 1}"
    marks = [pytest.mark.xfail(strict=True, reason=KNOWN[cid])] if cid in KNOWN else []
    return pytest.param(i, id=cid, marks=marks)


@pytest.mark.slow
@pytest.mark.parametrize("i", [_param(i) for i in range(len(acceptance.CRITERIA))])
def test_criterion(i, capsys):
    c = acceptance.run_one(i, "full")
    line = f"{c.id:5s} {'PASS' if c.passed else 'FAIL'}  {c.title}"
    if c.known_defect:
        line += f"  [known defect: {c.known_defect}]"
    with capsys.disabled():
        print(f"\n{line}")
    assert c.passed, c.details
