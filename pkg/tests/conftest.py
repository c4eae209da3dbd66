import pytest

from chorus.config import GridConfig, SimConfig, UsersConfig


def small_config(seed=1, duration=4.0, **sections) -> SimConfig:
    """2x2 blocks and a dozen users: enough for handovers in a few seconds of simulated time."""
    cfg = SimConfig(seed=seed, duration=duration, warmup=0.5)
    cfg.scenario.grid = GridConfig(blocks_x=2, blocks_y=2)
    cfg.scenario.users = UsersConfig(street=10, square=1, pedestrian=1)
    for section, values in sections.items():
        for k, v in values.items():
            setattr(getattr(cfg, section), k, v)
    return cfg.validate()


@pytest.fixture
def small():
    return small_config


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    failed = [r.nodeid for r in terminalreporter.stats.get("failed", [])
              if "test_acceptance" not in r.nodeid]
    unit = f"criterion  1: {'FAIL' if failed else 'PASS'}  unit/property suite, {len(failed)} failures"
    terminalreporter.section("acceptance criteria")
    for line in [unit] + sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(line)
