import pytest

from harvestsim.calibration import (
    Anchors, CalibrationError, bisect, calibrate, load_calibration, write_calibration,
)
from harvestsim.energy import DEFAULT_ETA_BUCK, DEFAULT_LEAKAGE_UW


@pytest.fixture(scope="module")
def fitted():
    return calibrate()


class TestCalibrate:
    def test_frozen_defaults_reproduced(self, fitted):
        assert fitted["leakage_uw"] == pytest.approx(DEFAULT_LEAKAGE_UW, rel=1e-3)
        assert fitted["eta_buck"] == pytest.approx(DEFAULT_ETA_BUCK, rel=1e-3)

    def test_leakage_range(self, fitted):
        assert 0 < fitted["leakage_uw"] < 50

    def test_anchors_hit(self, fitted):
        assert fitted["fitted"]["sense1_dark_h"] == pytest.approx(31.0, rel=1e-3)
        assert fitted["fitted"]["coldstart_h"] == pytest.approx(2.2, rel=1e-3)

    def test_predictions_present(self, fitted):
        p = fitted["predictions"]
        assert p["advertise_dark_h"] < p["sense5_dark_h"] < fitted["fitted"]["sense1_dark_h"]

    def test_idempotent(self, fitted, tmp_path):
        again = calibrate()
        assert again == fitted
        write_calibration(fitted, tmp_path / "a.json")
        write_calibration(again, tmp_path / "b.json")
        assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()
        assert load_calibration(tmp_path / "a.json")["eta_buck"] == fitted["eta_buck"]

    def test_zeroed_anchors(self):
        with pytest.raises(CalibrationError):
            calibrate(Anchors(dark_lifetime_h=0.0, coldstart_h=0.0))

    def test_unreachable_anchor(self):
        # even a leak-free cap cannot last 10 days on the 1-sensor app
        with pytest.raises(CalibrationError, match="not bracketed"):
            calibrate(Anchors(dark_lifetime_h=240.0))

    def test_incomplete_document(self, tmp_path):
        f = tmp_path / "c.json"
        f.write_text('{"leakage_uw": 3}')
        with pytest.raises(ValueError, match="eta_buck"):
            load_calibration(f)


class TestBisect:
    def test_root(self):
        assert bisect(lambda x: x * x - 2, 0, 2, 1e-9, 2, "sqrt") == pytest.approx(2**0.5)

    def test_no_bracket(self):
        with pytest.raises(CalibrationError):
            bisect(lambda x: x + 1, 0, 1, 1e-6, 1, "shifted")
