import math
from pathlib import Path

import numpy as np
import pytest

from paraest_figures import FigureSpec, SchemaError, fit_slope, read_table, render
from paraest_figures.csvio import mesh_size


def _write_timeseries(path: Path, level: int, n: int = 60) -> None:
    t = np.linspace(0.25, 15.0, n)
    err = 1e-3 * 2.0 ** (-2 * level) * np.ones(n)
    header = ("level,t,error_linf_l2,est_min,est_l1,est_l2,est_linf,"
              "eff_min,eff_l1,eff_l2,eff_linf,S_acc,T_acc,E_max,R_max,"
              "DT_acc,DS_acc,argmin_p_S,argmin_p_T,argmin_p_DT,argmin_p_DS,config_hash")
    rows = [header]
    for k in range(n):
        e = float(err[k])
        est = {"min": 20 * e, "l1": 20 * e * t[k], "l2": 20 * e * math.sqrt(t[k]),
               "linf": 20 * e}
        cells = [str(level), repr(float(t[k])), repr(e)]
        cells += [repr(float(est[s])) for s in ("min", "l1", "l2", "linf")]
        cells += [repr(float(est[s] / e)) for s in ("min", "l1", "l2", "linf")]
        cells += [repr(1e-4)] * 6
        cells += ["1", "2", "1", "2", "deadbeef0000"]
        rows.append(",".join(cells))
    path.write_text("\n".join(rows) + "\n")


def test_read_table_missing_column(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("a,b\n1,2\n")
    with pytest.raises(SchemaError, match="missing columns"):
        read_table(p, ("a", "zz"))


def test_read_table_empty_rows(tmp_path):
    p = tmp_path / "empty.csv"
    p.write_text("a,b\n")
    with pytest.raises(SchemaError, match="no data rows"):
        read_table(p, ("a",))


def test_spec_validation(tmp_path):
    with pytest.raises(ValueError, match="unknown figure kind"):
        FigureSpec(kind="pie", inputs=["x.csv"], output="o.svg")
    with pytest.raises(SchemaError):
        FigureSpec(kind="errors", inputs=[], output="o.svg")


def test_fit_slope_power_law():
    t = np.linspace(5, 15, 40)
    assert fit_slope(t, 2.0 * t ** 0.5, (5, 15)) == pytest.approx(0.5, abs=1e-12)


def test_mesh_size_convention():
    assert mesh_size(2) == pytest.approx(math.sqrt(2) / 4)


def test_render_errors_and_loglog(tmp_path):
    for lv in (4, 5):
        _write_timeseries(tmp_path / f"timeseries_i{lv}.csv", lv)
    inputs = [str(tmp_path / f"timeseries_i{lv}.csv") for lv in (4, 5)]
    out1 = render(FigureSpec(kind="errors", inputs=inputs,
                             output=str(tmp_path / "errors.svg")))
    assert Path(out1).exists() and Path(out1).stat().st_size > 0
    out2 = render(FigureSpec(kind="loglog_effectivity", inputs=inputs,
                             output=str(tmp_path / "loglog.svg")))
    svg = Path(out2).read_text()
    # synthetic effectivities grow like t, sqrt(t) and a constant
    assert "slope 1.00" in svg
    assert "slope 0.50" in svg
    assert "slope 0.00" in svg or "slope -0.00" in svg


def test_render_is_deterministic(tmp_path):
    _write_timeseries(tmp_path / "timeseries_i3.csv", 3)
    inputs = [str(tmp_path / "timeseries_i3.csv")]
    a = Path(render(FigureSpec(kind="loglog_effectivity", inputs=inputs,
                               output=str(tmp_path / "a.svg")))).read_bytes()
    b = Path(render(FigureSpec(kind="loglog_effectivity", inputs=inputs,
                               output=str(tmp_path / "b.svg")))).read_bytes()
    assert a == b


def test_empty_series_errors_not_silent(tmp_path):
    p = tmp_path / "timeseries_i2.csv"
    p.write_text("level,t,error_linf_l2,est_min,eff_min\n")
    with pytest.raises(SchemaError):
        render(FigureSpec(kind="errors", inputs=[str(p)],
                          output=str(tmp_path / "x.svg")))
