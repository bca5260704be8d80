import itertools
import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ddtn.benchmarks import ghz, random_circuit
from ddtn.circuit import BasisState, Circuit, Gate, GateKind
from ddtn.tn import (ContractionPlan, FlopCounter, PlanError, Tensor, TensorNetwork,
                     choose_slice_labels, circuit_to_network, contract, contract_pair,
                     contract_sliced, plan_cost, plan_exhaustive, plan_greedy, sequential_plan,
                     slice_network)
from oracle import final_state

EPS = 1e-10
R = 1 / math.sqrt(2)


def brute_pair(a: Tensor, b: Tensor, out_labels):
    dims = {**dict(zip(a.labels, a.data.shape)), **dict(zip(b.labels, b.data.shape))}
    shared = [lb for lb in a.labels if lb in b.labels]
    out = np.zeros([dims[lb] for lb in out_labels], dtype=complex)
    for free in itertools.product(*(range(dims[lb]) for lb in out_labels)):
        env = dict(zip(out_labels, free))
        total = 0
        for vals in itertools.product(*(range(dims[lb]) for lb in shared)):
            env.update(zip(shared, vals))
            total += a.data[tuple(env[lb] for lb in a.labels)] * b.data[tuple(env[lb] for lb in b.labels)]
        out[free] = total
    return out


def rand_tensor(rng, labels, dims):
    shape = [dims[lb] for lb in labels]
    return Tensor(labels, rng.normal(size=shape) + 1j * rng.normal(size=shape))


def random_network(rng, num_tensors, num_edges, num_open=0, max_dim=3):
    """Random connected-ish network of small tensors with unique pairwise bonds."""
    tensors = {i: [] for i in range(num_tensors)}
    dims = {}
    for e in range(num_edges):
        a, b = rng.choice(num_tensors, size=2, replace=False)
        lb = f"e{e}"
        dims[lb] = int(rng.integers(2, max_dim + 1))
        tensors[int(a)].append(lb)
        tensors[int(b)].append(lb)
    opens = []
    for o in range(num_open):
        lb = f"o{o}"
        dims[lb] = 2
        tensors[int(rng.integers(num_tensors))].append(lb)
        opens.append(lb)
    return TensorNetwork({i: rand_tensor(rng, lbs, dims) for i, lbs in tensors.items()}, opens)


def brute_network(net: TensorNetwork):
    """Sum over every assignment of every closed index."""
    dims = net.dims
    closed = net.closed_indices
    opens = list(net.open_indices)
    out = np.zeros([dims[lb] for lb in opens], dtype=complex)
    for ov in itertools.product(*(range(dims[lb]) for lb in opens)):
        env = dict(zip(opens, ov))
        total = 0
        for cv in itertools.product(*(range(dims[lb]) for lb in closed)):
            env.update(zip(closed, cv))
            term = 1
            for t in net.tensors.values():
                term *= t.data[tuple(env[lb] for lb in t.labels)]
            total += term
        out[ov] = total
    return out


def ghz_scalar_net():
    return circuit_to_network(ghz(3), BasisState(3, 0), BasisState(3, 0))


# --- contract_pair ---------------------------------------------------------

def test_matrix_product():
    rng = np.random.default_rng(0)
    dims = {"i": 3, "k": 4, "j": 2}
    a, b = rand_tensor(rng, ["i", "k"], dims), rand_tensor(rng, ["k", "j"], dims)
    c = contract_pair(a, b)
    assert c.labels == ("i", "j")
    np.testing.assert_allclose(c.data, a.data @ b.data, atol=EPS)


def test_scalar_scaling():
    rng = np.random.default_rng(1)
    t = rand_tensor(rng, ["a", "b"], {"a": 2, "b": 3})
    s = Tensor([], 2.5 - 1j)
    np.testing.assert_allclose(contract_pair(t, s).data, t.data * (2.5 - 1j))


@pytest.mark.parametrize("seed", range(5))
def test_pair_matches_brute_force(seed):
    rng = np.random.default_rng(seed)
    dims = {"p": 2, "q": 3, "r": 2, "s": 3, "t": 2}
    a = rand_tensor(rng, ["p", "q", "r"], dims)
    b = rand_tensor(rng, ["s", "r", "q"], dims)
    for counter in (None, FlopCounter()):
        c = contract_pair(a, b, counter)
        assert c.labels == ("p", "s")
        np.testing.assert_allclose(c.data, brute_pair(a, b, ["p", "s"]), atol=1e-12)


def test_outer_product_and_mismatch():
    a = Tensor(["x"], [1, 2])
    b = Tensor(["y"], [3, 4, 5])
    np.testing.assert_allclose(contract_pair(a, b).data, np.outer([1, 2], [3, 4, 5]))
    with pytest.raises(ValueError):
        contract_pair(Tensor(["k"], [1, 2]), Tensor(["k"], [1, 2, 3]))


# --- networks from circuits -------------------------------------------------

def test_ghz_network_shape_and_scalar():
    net = ghz_scalar_net()
    ranks = sorted(t.rank for t in net.tensors.values())
    assert ranks == [1] * 6 + [2] + [4, 4]
    assert net.open_indices == ()
    for plan in (plan_greedy(net), sequential_plan(net), plan_exhaustive(net)):
        assert abs(complex(contract(net, plan).data) - R) < 1e-12


def test_ghz_full_state_tensor():
    net = circuit_to_network(ghz(3), BasisState(3, 0))
    out = contract(net)
    assert out.rank == 3
    np.testing.assert_allclose(out.data.reshape(-1), [R, 0, 0, 0, 0, 0, 0, R], atol=1e-12)


def test_empty_circuit_network():
    net = circuit_to_network(Circuit(3, []), BasisState(3, 0))
    assert len(net) == 3 and all(t.rank == 1 for t in net.tensors.values())
    np.testing.assert_allclose(contract(net).data.reshape(-1), np.eye(8)[0])


def test_single_hadamard_amplitude():
    net = circuit_to_network(Circuit(1, [Gate(GateKind.H, (0,))]), BasisState(1, 0), BasisState(1, 1))
    assert abs(complex(contract(net).data) - R) < 1e-12


def test_single_tensor_network():
    t = Tensor(["a"], [1, 2j])
    out = contract(TensorNetwork({0: t}, ["a"]), ContractionPlan(0))
    np.testing.assert_array_equal(out.data, t.data)


def test_network_validation():
    t = Tensor(["a"], [1, 0])
    with pytest.raises(ValueError):
        TensorNetwork({0: t, 1: t, 2: t}, [])
    with pytest.raises(ValueError):
        TensorNetwork({0: t}, [])


circuits = st.builds(lambda n, m, s: random_circuit(n, m, s),
                     st.integers(1, 7), st.integers(0, 30), st.integers(0, 2**32 - 1))


@settings(max_examples=60, deadline=None)
@given(circuits)
def test_network_contraction_matches_oracle(c):
    net = circuit_to_network(c, BasisState(c.num_qubits, 0))
    np.testing.assert_allclose(contract(net).data.reshape(-1), final_state(c), atol=1e-9)


@settings(max_examples=40, deadline=None)
@given(circuits, st.integers(0, 2**32 - 1))
def test_amplitude_networks_match_oracle(c, seed):
    n = c.num_qubits
    i = int(np.random.default_rng(seed).integers(2**n))
    net = circuit_to_network(c, BasisState(n, 0), BasisState(n, i))
    assert abs(complex(contract(net).data) - final_state(c)[i]) < 1e-9


# --- plans and costs --------------------------------------------------------

def test_matrix_product_cost():
    dims = {"i": 2, "k": 2, "j": 2}
    rng = np.random.default_rng(0)
    net = TensorNetwork({0: rand_tensor(rng, ["i", "k"], dims), 1: rand_tensor(rng, ["k", "j"], dims)},
                        ["i", "j"])
    cost = plan_cost(net, ContractionPlan((0, 1)))
    assert (cost.flops, cost.max_intermediate, cost.max_rank) == (8, 4, 2)
    assert plan_cost(TensorNetwork({0: Tensor(["a"], [1, 1])}, ["a"]), ContractionPlan(0)).flops == 0


def test_malformed_plans():
    net = ghz_scalar_net()
    with pytest.raises(PlanError):
        contract(net, ContractionPlan((0, 1)))
    with pytest.raises(PlanError):
        ContractionPlan((0, 1, 2))
    with pytest.raises(PlanError):
        plan_exhaustive(random_network(np.random.default_rng(0), 13, 14))


def test_greedy_on_ghz():
    net = ghz_scalar_net()
    g = plan_greedy(net)
    assert plan_cost(net, g).max_rank <= 3
    assert plan_cost(net, g).flops <= plan_cost(net, sequential_plan(net)).flops
    assert plan_cost(net, plan_exhaustive(net)).flops <= plan_cost(net, g).flops


def test_two_tensor_unique_plan():
    rng = np.random.default_rng(2)
    dims = {"a": 2}
    net = TensorNetwork({0: rand_tensor(rng, ["a"], dims), 1: rand_tensor(rng, ["a"], dims)}, [])
    assert sorted(plan_greedy(net).leaves()) == [0, 1]
    assert sorted(plan_exhaustive(net).leaves()) == [0, 1]


def _all_trees(items):
    if len(items) == 1:
        yield items[0]
        return
    first, rest = items[0], items[1:]
    for r in range(len(rest) + 1):
        for left_extra in itertools.combinations(rest, r):
            left = [first, *left_extra]
            right = [x for x in rest if x not in left_extra]
            if not right:
                continue
            for lt in _all_trees(left):
                for rt in _all_trees(right):
                    yield (lt, rt)


def test_small_bond_first_in_chain():
    # A[i,k] B[k,j] C[j,l] with |k| = 32. Enumerating the three trees:
    # (AB)C costs 2*32*2 + 2*2*2 = 136, A(BC) costs 32*2*2 + 2*32*2 = 256,
    # so the pair sharing the wide bond goes first and removes it at once.
    rng = np.random.default_rng(4)
    dims = {"i": 2, "k": 32, "j": 2, "l": 2}
    net = TensorNetwork({0: rand_tensor(rng, ["i", "k"], dims), 1: rand_tensor(rng, ["k", "j"], dims),
                         2: rand_tensor(rng, ["j", "l"], dims)}, ["i", "l"])
    costs = {t: plan_cost(net, ContractionPlan(t)).flops for t in _all_trees([0, 1, 2])}
    best = plan_exhaustive(net)
    assert plan_cost(net, best).flops == min(costs.values())
    top = best.tree
    inner = top[0] if isinstance(top[0], tuple) else top[1]
    assert sorted(inner) == [0, 1]
    assert plan_cost(net, best).flops == 136


def test_exhaustive_matches_enumeration():
    rng = np.random.default_rng(6)
    for _ in range(10):
        net = random_network(rng, 5, 6, num_open=1)
        best = min(plan_cost(net, ContractionPlan(t)).flops for t in _all_trees(list(net.tensors)))
        assert plan_cost(net, plan_exhaustive(net)).flops == best


def test_matrix_chain_greedy_near_optimal():
    rng = np.random.default_rng(9)
    sizes = [2, 9, 3, 7, 2, 8, 4]
    dims = {f"b{i}": s for i, s in enumerate(sizes)}
    tensors = {i: rand_tensor(rng, [f"b{i}", f"b{i+1}"], dims) for i in range(6)}
    net = TensorNetwork(tensors, ["b0", "b6"])
    g = plan_cost(net, plan_greedy(net)).flops
    e = plan_cost(net, plan_exhaustive(net)).flops
    assert e <= g <= 2 * e
    chain = np.linalg.multi_dot([tensors[i].data for i in range(6)])
    np.testing.assert_allclose(contract(net, plan_greedy(net)).data, chain, atol=1e-8)


@pytest.mark.parametrize("seed", range(12))
def test_plan_independence_and_counted_flops(seed):
    rng = np.random.default_rng(seed)
    net = random_network(rng, int(rng.integers(3, 7)), int(rng.integers(3, 8)), num_open=int(rng.integers(0, 3)))
    ref = brute_network(net)
    for plan in (plan_greedy(net), sequential_plan(net), plan_exhaustive(net),
                 sequential_plan(net, list(rng.permutation(list(net.tensors))))):
        counter = FlopCounter()
        out = contract(net, plan, counter)
        np.testing.assert_allclose(out.data, ref, atol=1e-9)
        assert counter.count == plan_cost(net, plan).flops


def test_greedy_deterministic():
    rng = np.random.default_rng(3)
    net = random_network(rng, 8, 12, num_open=2)
    assert plan_greedy(net) == plan_greedy(net)


# --- slicing ----------------------------------------------------------------

def test_slice_ghz_on_one_wire():
    net = ghz_scalar_net()
    label = net.closed_indices[0]
    parts = slice_network(net, [label])
    assert len(parts) == 2
    total = sum(complex(contract(sub).data) for _, sub in parts)
    assert abs(total - R) < 1e-12


def test_slice_edge_cases():
    net = circuit_to_network(ghz(3), BasisState(3, 0))
    assert slice_network(net, []) == [({}, net)]
    with pytest.raises(ValueError):
        slice_network(net, [net.open_indices[0]])
    with pytest.raises(ValueError):
        slice_network(net, ["nope"])


@pytest.mark.parametrize("seed", range(6))
def test_sliced_sums_and_workers(seed):
    rng = np.random.default_rng(seed)
    c = random_circuit(4, 10, rng)
    net = circuit_to_network(c, BasisState(4, 0))
    ref = contract(net).data
    plan = plan_greedy(net)
    closed = net.closed_indices
    for size in (1, 2, 3):
        labels = [closed[int(i)] for i in rng.choice(len(closed), size=size, replace=False)]
        outs = [contract_sliced(net, labels, plan, workers=w).data for w in (1, 2, 8)]
        np.testing.assert_allclose(outs[0], ref, atol=1e-10)
        assert all(np.array_equal(outs[0], o) for o in outs[1:])


def test_choose_slice_labels():
    net = ghz_scalar_net()
    plan = plan_greedy(net)
    labels = choose_slice_labels(net, plan, 2)
    assert len(labels) == 2 and set(labels) <= set(net.closed_indices)
    assert choose_slice_labels(net, plan, 0) == []
    with pytest.raises(ValueError):
        choose_slice_labels(net, plan, 100)


# --- export -----------------------------------------------------------------

def test_json_round_trip():
    net = circuit_to_network(random_circuit(3, 6, 1), BasisState(3, 5))
    text = json.dumps(net.to_dict())
    back = TensorNetwork.from_dict(json.loads(text))
    assert back.open_indices == net.open_indices
    for tid, t in net.tensors.items():
        assert back.tensors[tid].labels == t.labels
        np.testing.assert_array_equal(back.tensors[tid].data, t.data)
    plan = plan_greedy(net)
    assert ContractionPlan.from_json(json.loads(json.dumps(plan.to_json()))) == plan
