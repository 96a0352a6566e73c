import pytest

from pilotcheck.model import fixture_path, load_model
from pilotcheck.ontology import load_ontology
from pilotcheck.policy import (BOTTOM, DataCommunicationRule, DataUsageRule, PilotPolicy)
from pilotcheck.conditions import TT
from pilotcheck.semantics import ModelConfig
from pilotcheck.universe import AbstractUniverse


def three_policy_config(ds_pool=("p1", "p2", "p3"), dc_pool=("p1", "p2", "p3"), repo=False,
                 dcs=("DC1", "DC2"), values=(1,)):
    devices = {"DS": {"entity": "subject", "role": "ds"}}
    for d in dcs:
        devices[d] = {"entity": "controller", "role": "dc"}
    if repo:
        devices["Repo"] = {"entity": "controller", "role": "repository"}
    onto = load_ontology(
        {"entities": {"elements": ["subject", "controller"]},
         "datatypes": {"elements": ["t"]},
         "purposes": {"elements": []}},
        devices=devices, items={"i": {"type": "t", "owner": "DS"}})
    names = set(ds_pool) | set(dc_pool) | {"p1", "p2", "p3"}
    u = AbstractUniverse({n: (None if n == "bottom" else "t") for n in names}, [("p1", "p2")])
    init = {"DS": [(p,) for p in ds_pool]}
    init.update({d: [(p,) for p in dc_pool] for d in dcs})
    return ModelConfig(onto, u, init, {"i": list(values)})


@pytest.fixture
def three_policy_cfg():
    return three_policy_config()


@pytest.fixture
def three_policy_cfg_repo():
    return three_policy_config(repo=True)


@pytest.fixture(scope="session")
def cookie_banner():
    return load_model(fixture_path("cookie_banner.cfg"))


def to_pilot(plain):
    """Plain oracle tuple → PilotPolicy."""
    if plain is None:
        return BOTTOM

    def dcr(c):
        e, ps, rt = c
        return DataCommunicationRule(TT, e, DataUsageRule(ps, rt))

    t, c, tr = plain
    return PilotPolicy(t, dcr(c), frozenset(dcr(x) for x in tr))


# -- one summary line per acceptance criterion

_criteria = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    if report.when == "call" or report.failed:
        doc = (item.function.__doc__ or item.name).strip().splitlines()[0]
        ok = report.passed and _criteria.get(marker.args[0], (True,))[0]
        _criteria[marker.args[0]] = (ok, doc)


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion number")


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_criteria):
        ok, doc = _criteria[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {doc}")
