import json

import pytest

from levels_lab.dynamics import (
    descend_from,
    descent_cascade,
    descent_certificate,
    g_inverse_approach,
    level_of,
    orbit_explore,
    verify_certificate,
)
from levels_lab.errors import RangeError
from levels_lab.generators import Word
from levels_lab.partition import LocalPoint


@pytest.mark.parametrize("k", range(1, 11))
def test_certificates_found_and_reverified(action, model, k):
    cert = descent_certificate(action, k, m_max=10)
    assert cert.found and cert.m == 0
    assert cert.word == Word.of(("F", -model.params.chain_length(k)))
    margin = verify_certificate(action, cert)
    assert margin == cert.margin
    assert margin >= 1e-6 * model.bc[k + 1]
    info = level_of(model, cert.end)
    assert info.kind == "level" and info.k == k + 1


def test_certificate_lands_in_marked_interval(action, model):
    # f^-(n_{k+1}-n_k) carries [b_k, c_k] onto [u_{k+1}, v_{k+1}]
    cert = descent_certificate(action, 2)
    u, v = model.uv_points(3)
    assert u.s <= cert.end.s <= v.s


def test_certificate_needs_next_level(action, model):
    with pytest.raises(RangeError) as info:
        descent_certificate(action, model.params.k_max)
    assert info.value.needed_k_max == model.params.k_max + 1


def test_failed_search_reports_closest(action, model):
    # starting outside ]b_k, c_k[, no word of this shape can land in level k+1
    cert = descend_from(action, LocalPoint(model.params.n_k(2), 0.1), 2, m_max=3)
    assert not cert.found and cert.m is None
    assert cert.closest is not None


def test_cascade_one_to_four(action, model):
    cascade = descent_cascade(action, 1, 4)
    assert cascade.complete and len(cascade.certificates) == 4
    end = action.apply_word(cascade.word, model.uv_points(1)[0])
    info = level_of(model, end)
    assert info.kind == "level" and info.k == 5
    assert len(cascade.word) == sum(model.params.chain_length(k) for k in range(1, 5))


def test_cascade_bounds(action):
    with pytest.raises(RangeError):
        descent_cascade(action, 0, 3)


@pytest.mark.parametrize("k", [1, 2])
def test_g_inverse_approaches_b_monotonically(action, model, k):
    steps, monotone = g_inverse_approach(action, k, 1e-3 * model.bc[k])
    assert steps is not None and monotone
    # cubic tangency at b_k: many steps, but finitely many
    assert steps > 1000


def test_g_inverse_approach_cap(action, model):
    steps, monotone = g_inverse_approach(action, 1, 1e-3 * model.bc[1], m_max=10)
    assert steps is None and monotone


def test_level_of_kinds(model):
    b, c = model.bc_points(3)
    u, v = model.uv_points(3)
    assert level_of(model, b).kind == "endpoint"
    assert level_of(model, LocalPoint(None, 0.0)).kind == "fixed"
    assert level_of(model, LocalPoint(model.params.n_k(3), 0.5)).marked
    assert not level_of(model, LocalPoint(model.params.n_k(3), 0.3)).marked
    assert level_of(model, LocalPoint(5, 0.1)).kind == "gap"
    assert level_of(model, LocalPoint(model.params.n_k(3), 0.5)).chain == (2, 0)


def test_orbit_explore_deterministic(action, model):
    start = model.uv_points(1)[0]
    a = orbit_explore(action, start, 6)
    b = orbit_explore(action, start, 6)
    assert a.to_json() == b.to_json()
    assert a.levels_reached[:3] == [1, 2, 3]
    assert not a.truncated


def test_orbit_explore_budget(action, model):
    rep = orbit_explore(action, model.uv_points(1)[0], 12, budget=50)
    assert rep.truncated and rep.visited <= 50


def test_g_orbit_stays_in_its_level(action, model):
    rep = orbit_explore(action, LocalPoint(model.params.n_k(3), 0.5), 20, letters=("G", "G-"))
    assert rep.levels_reached == [3]
    assert rep.visited == 41


def test_json_round_trip(action):
    cert = descent_certificate(action, 3)
    doc = json.loads(json.dumps(cert.to_json()))
    assert doc["k"] == 3 and doc["word"] == [["F", -8]]
    assert set(doc) >= {"k", "m", "word", "end", "margin"}
    cascade = json.loads(json.dumps(descent_cascade(action, 1, 2).to_json()))
    assert cascade["complete"] and cascade["word_length"] == 6
