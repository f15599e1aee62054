import json

import numpy as np
import pytest

from tuplebn import (
    EXACT_TOL,
    DiscreteDag,
    ModelViolationError,
    ProviderCiDecider,
    RecoveryTrace,
    Skeleton,
    attach_cpts,
    empirical_ci_decider,
    empirical_provider,
    exact_ci_decider,
    exact_provider,
    factorized_joint,
    is_markov_relative,
    minimize_parent_set,
    random_dag,
    recover_structure,
    sample,
    tuple_frequencies,
)


def test_chain_recovery(chain_joint):
    decider = exact_ci_decider(chain_joint, 1)
    skeleton, trace = recover_structure(decider, 3, 1)
    assert skeleton.parents == ((), (1,), (2,))
    assert skeleton.max_in_degree() == 1
    assert [t.node for t in trace.nodes] == [1, 2, 3]
    # node 3 first tests K={1}, rejects it, then accepts K={2}
    assert trace.nodes[2].tested[0] == (1,)
    assert trace.nodes[2].accepted == (2,)


def test_product_measure_recovers_empty(product_joint):
    for delta in (0, 1, 2):
        skeleton, _ = recover_structure(exact_ci_decider(product_joint, delta), 3, delta)
        assert skeleton.parents == ((), (), ())


def test_xor_needs_both_parents(xor_joint):
    skeleton, _ = recover_structure(exact_ci_decider(xor_joint, 2), 3, 2)
    assert skeleton.parents[2] == (1, 2)
    with pytest.raises(ModelViolationError) as exc:
        recover_structure(exact_ci_decider(xor_joint, 1), 3, 1)
    assert exc.value.node == 3


def test_delta_zero_vacuous(chain_joint):
    skeleton, _ = recover_structure(exact_ci_decider(chain_joint, 0), 3, 0)
    assert skeleton.parents == ((), (), ())


def test_minimize_parent_set_chain(chain_joint):
    decider = exact_ci_decider(chain_joint, 2)
    assert minimize_parent_set(decider, 3, (1, 2), 2) == (2,)
    assert minimize_parent_set(decider, 3, (), 2) == ()


def test_minimize_independent_measure(product_joint):
    decider = exact_ci_decider(product_joint, 2)
    assert minimize_parent_set(decider, 3, (1, 2), 2) == ()


def test_attach_cpts_inverts_factorization(chain_dag, chain_joint):
    provider = exact_provider(chain_joint, 3)
    decider = ProviderCiDecider(provider, EXACT_TOL)
    skeleton, _ = recover_structure(decider, 3, 1)
    result = attach_cpts(skeleton, provider)
    assert result.uniform_rows == ()
    for mine, true in zip(result.dag.cpts, chain_dag.cpts):
        assert np.allclose(mine, true, atol=1e-10)


def test_attach_cpts_zero_mass_uniform_row():
    # a measure with a dead parent configuration: X1 is the constant 0
    dead = DiscreteDag(
        2, (2, 2), 1, ((), (1,)),
        [np.array([[1.0, 0.0]]), np.array([[0.3, 0.7], [0.6, 0.4]])],
    )
    joint = factorized_joint(dead)
    provider = exact_provider(joint, 3)
    skeleton = Skeleton(2, 1, ((), (1,)))
    result = attach_cpts(skeleton, provider)
    assert result.uniform_rows == ((2, 1),)  # parent value 1 never occurs
    assert np.allclose(result.dag.cpts[1][1], [0.5, 0.5])
    assert np.allclose(result.dag.cpts[1][0], [0.3, 0.7], atol=1e-12)


def test_recovered_structure_markov_on_random_instances():
    for seed in range(20):
        dag = random_dag(6, 2, (2,) * 6, seed=seed)
        joint = factorized_joint(dag)
        provider = exact_provider(joint, 5)
        skeleton, _ = recover_structure(ProviderCiDecider(provider, EXACT_TOL), 6, 2)
        rec = attach_cpts(skeleton, provider).dag
        assert is_markov_relative(joint, rec, tol=1e-8)
        assert provider.access_log.max_size <= 5


def test_recovery_deterministic(chain_joint):
    runs = [recover_structure(exact_ci_decider(chain_joint, 1), 3, 1) for _ in range(2)]
    assert runs[0][0] == runs[1][0]
    assert runs[0][1].to_dict() == runs[1][1].to_dict()


def test_trace_json_round_trip(chain_joint):
    _, trace = recover_structure(exact_ci_decider(chain_joint, 1), 3, 1)
    blob = json.dumps(trace.to_dict())
    again = RecoveryTrace.from_dict(json.loads(blob))
    assert again.to_dict() == trace.to_dict()
    assert again.nodes[2].parents == (2,)


def test_empirical_recovery_on_chain(chain_dag, chain_joint):
    s = sample(chain_dag, 100_000, seed=21)
    provider = empirical_provider(tuple_frequencies(s, 3))
    decider = empirical_ci_decider(provider, 0.0015)
    skeleton, _ = recover_structure(decider, 3, 1)
    rec = attach_cpts(skeleton, provider).dag
    assert is_markov_relative(chain_joint, rec, tol=1e-2)
    assert provider.access_log.max_size <= 3


def test_decider_validates_threshold(chain_joint):
    provider = exact_provider(chain_joint, 3)
    with pytest.raises(ValueError):
        ProviderCiDecider(provider, 0.0)
    with pytest.raises(ValueError):
        empirical_ci_decider(provider, -0.1)


def test_budget_never_exceeded_with_tight_provider(chain_joint):
    # a provider budgeted at exactly 2*delta+1 never sees an oversized query
    for delta in (0, 1, 2):
        provider = exact_provider(chain_joint, 2 * delta + 1)
        recover_structure(ProviderCiDecider(provider, EXACT_TOL), 3, delta)
        assert provider.access_log.max_size <= 2 * delta + 1


def test_model_violation_names_node_and_exhausts_candidates(xor_joint):
    decider = exact_ci_decider(xor_joint, 1)
    with pytest.raises(ModelViolationError) as exc:
        recover_structure(decider, 3, 1)
    assert exc.value.node == 3
    assert "node 3" in str(exc.value)
    assert "2 candidate" in str(exc.value)  # both size-1 subsets of {1,2} tried
