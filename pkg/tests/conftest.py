import pytest

from noma_lab.model import SystemParams

# Channel sets used by the bundled presets.
FIG2_ALPHAS = dict(alpha_su1=5.0, alpha_su2=1.0, alpha_su3=1.0, alpha_ru2=2.0, alpha_ru3=10.0)
FIG2_GROUPS = [(0.6, 0.9), (0.9, 0.6)]
FIG3_SETS = [
    dict(alpha_su1=5.0, alpha_su2=1.0, alpha_su3=2.0, alpha_ru2=3.0, alpha_ru3=10.0),
    dict(alpha_su1=5.0, alpha_su2=2.0, alpha_su3=1.0, alpha_ru2=10.0, alpha_ru3=3.0),
]
FIG4_ALPHAS = dict(alpha_su1=5.0, alpha_su2=1.0, alpha_su3=2.0, alpha_ru2=1.0, alpha_ru3=10.0)
FIG5_ALPHAS = dict(alpha_su1=20.0, alpha_su2=1.0, alpha_su3=10.0, alpha_ru2=25.0, alpha_ru3=30.0)


def fig2_params(rho_db, a1=0.9, b1=0.6):
    return SystemParams.from_db(rho_db, a1=a1, b1=b1, **FIG2_ALPHAS)


@pytest.fixture
def fig2():
    return fig2_params


def pytest_terminal_summary(terminalreporter):
    import sys

    module = sys.modules.get("test_acceptance")
    results = getattr(module, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for number in sorted(results):
            terminalreporter.write_line(results[number])
