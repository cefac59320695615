"""Autodiff, layers, optimizer, and checkpoint tests.

Gradient checks compare the tape's gradients against central finite
differences (h = 1e-5) and require relative error below 1e-4 for every
parameter of every layer kind, isolated and composed.
"""

import math

import numpy as np
import pytest

from molforge import nn
from molforge.nn import Tape, Tensor, TensorError, backward


def analytic_grads(build_loss, params):
    for p in params:
        p.grad = None
    with Tape():
        loss = build_loss()
        backward(loss)
    return [np.array(p.grad) if p.grad is not None else np.zeros_like(p.data) for p in params]


def fd_grads(build_loss, params, h=1e-5):
    grads = []
    for p in params:
        g = np.zeros_like(p.data)
        flat = p.data.reshape(-1)
        gf = g.reshape(-1)
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + h
            plus = build_loss().item()
            flat[i] = orig - h
            minus = build_loss().item()
            flat[i] = orig
            gf[i] = (plus - minus) / (2.0 * h)
        grads.append(g)
    return grads


def assert_gradcheck(build_loss, params, tol=1e-4):
    exact = analytic_grads(build_loss, params)
    approx = fd_grads(build_loss, params)
    for a, f in zip(exact, approx):
        scale = max(np.linalg.norm(a) + np.linalg.norm(f), 1e-12)
        rel = np.linalg.norm(a - f) / scale
        assert rel < tol, f"gradient mismatch: relative error {rel:.3e}"


# -- tape fundamentals -------------------------------------------------------


def test_grad_of_sum_of_squares():
    p = Tensor(np.array([1.0, 2.0]), requires_grad=True)
    with Tape():
        loss = nn.tensor_sum(p * p)
        backward(loss)
    assert np.allclose(p.grad, [2.0, 4.0], atol=0, rtol=0)


def test_constant_loss_gives_zero_grads():
    p = Tensor(np.array([3.0, -1.0]), requires_grad=True)
    with Tape():
        loss = nn.tensor_sum(p * 0.0)
        backward(loss)
    assert np.array_equal(p.grad, np.zeros(2))


def test_backward_requires_tape():
    p = Tensor(np.array([1.0]), requires_grad=True)
    loss = nn.tensor_sum(p)
    with pytest.raises(TensorError, match="tape"):
        backward(loss)


def test_backward_rejects_vector_loss():
    p = Tensor(np.array([1.0, 2.0]), requires_grad=True)
    with Tape():
        with pytest.raises(TensorError, match="scalar"):
            backward(p * p)


def test_grads_accumulate_across_backwards():
    p = Tensor(np.array([2.0]), requires_grad=True)
    with Tape():
        backward(nn.tensor_sum(p * p))
    with Tape():
        backward(nn.tensor_sum(p * p))
    assert np.allclose(p.grad, [8.0])


def test_nonfinite_forward_names_op():
    with pytest.raises(TensorError, match="'log'"):
        nn.log(Tensor(np.array([-1.0])))


def test_nonfinite_gradient_names_op():
    p = Tensor(np.array([0.0]), requires_grad=True)
    with Tape():
        loss = nn.tensor_sum(nn.power(p, 0.5))
        with pytest.raises(TensorError, match="'power'"):
            backward(loss)


def test_nested_tapes_rejected():
    with Tape():
        with pytest.raises(TensorError, match="already active"):
            with Tape():
                pass


# -- op gradients ------------------------------------------------------------


def test_gradcheck_elementwise_ops():
    rng = np.random.default_rng(7)
    a = Tensor(rng.normal(size=(3, 4)), requires_grad=True)
    b = Tensor(rng.normal(size=(3, 4)) + 3.0, requires_grad=True)

    def loss():
        mixed = a * b + a / b - nn.exp(a * 0.3) + nn.log(b)
        return nn.tensor_sum(mixed * mixed)

    assert_gradcheck(loss, [a, b])


def test_gradcheck_broadcast_add():
    rng = np.random.default_rng(8)
    x = Tensor(rng.normal(size=(4, 3)), requires_grad=True)
    row = Tensor(rng.normal(size=(3,)), requires_grad=True)

    def loss():
        return nn.tensor_sum(nn.power(x + row, 2.0))

    assert_gradcheck(loss, [x, row])


def test_gradcheck_matmul_softplus_mean():
    rng = np.random.default_rng(9)
    w = Tensor(rng.normal(size=(5, 4)), requires_grad=True)
    x = Tensor(rng.normal(size=(6, 5)))

    def loss():
        return nn.mean(nn.softplus(nn.matmul(x, w)))

    assert_gradcheck(loss, [w])


def test_gradcheck_log_softmax():
    rng = np.random.default_rng(10)
    z = Tensor(rng.normal(size=(5, 7)) * 3.0, requires_grad=True)
    picks = np.array([0, 3, 6, 2, 1])

    def loss():
        lp = nn.log_softmax(z)
        rows = nn.gather_rows(lp, np.arange(5))
        onehot = np.zeros((5, 7))
        onehot[np.arange(5), picks] = 1.0
        return -nn.tensor_sum(rows * onehot)

    assert_gradcheck(loss, [z])


def test_gradcheck_segment_and_gather():
    rng = np.random.default_rng(11)
    x = Tensor(rng.normal(size=(6, 3)), requires_grad=True)
    seg = np.array([0, 0, 1, 2, 2, 2])
    idx = np.array([2, 2, 0, 1])

    def loss():
        pooled = nn.segment_sum(x, seg, 3)
        regathered = nn.gather_rows(pooled, idx)
        return nn.tensor_sum(nn.power(regathered, 2.0))

    assert_gradcheck(loss, [x])


def test_gradcheck_concat_reshape():
    rng = np.random.default_rng(12)
    a = Tensor(rng.normal(size=(2, 3)), requires_grad=True)
    b = Tensor(rng.normal(size=(2, 2)), requires_grad=True)

    def loss():
        joined = nn.concat([a, b], axis=1)
        flat = nn.reshape(joined, (10,))
        return nn.tensor_sum(flat * flat * 0.5)

    assert_gradcheck(loss, [a, b])


# -- softmax invariants -------------------------------------------------------


def test_softmax_rows_sum_to_one():
    rng = np.random.default_rng(13)
    z = Tensor(rng.normal(size=(40, 9)) * 20.0)
    s = nn.softmax(z).data
    assert np.all(s > 0)
    assert np.allclose(s.sum(axis=1), 1.0, atol=1e-6)


def test_segment_softmax_sums_to_one_per_segment():
    rng = np.random.default_rng(14)
    scores = Tensor(rng.normal(size=(12, 1)) * 15.0)
    seg = np.array([0, 0, 0, 1, 1, 2, 2, 2, 2, 4, 4, 4])
    alpha = nn.segment_softmax(scores, seg, 5).data
    sums = np.zeros(5)
    np.add.at(sums, seg, alpha[:, 0])
    assert np.all(alpha > 0)
    assert np.allclose(sums[[0, 1, 2, 4]], 1.0, atol=1e-6)
    assert sums[3] == 0.0


def test_shifted_softplus_fixed_points():
    x = Tensor(np.array([0.0, 50.0, -50.0]))
    y = nn.shifted_softplus(x).data
    assert abs(y[0]) < 1e-15
    assert abs(y[1] - (50.0 - math.log(2.0))) < 1e-9
    assert abs(y[2] - (-math.log(2.0))) < 1e-12


# -- radial basis and cutoff --------------------------------------------------


def test_rbf_center_spacing_and_peaks():
    centers = np.linspace(0.0, 15.0, 25)
    assert abs((centers[1] - centers[0]) - 0.625) < 1e-12
    expanded = nn.gaussian_rbf(centers, 25, 15.0)
    assert np.allclose(np.diag(expanded), 1.0, atol=0, rtol=0)


def test_rbf_decays_from_first_center():
    row = nn.gaussian_rbf(np.array([0.0]), 25, 15.0)[0]
    assert np.all(np.diff(row) < 0)


def test_cosine_cutoff_endpoints():
    d = np.array([0.0, 5.0, 10.0, 10.5, 25.0])
    c = nn.cosine_cutoff(d, 10.0)
    assert c[0] == 1.0
    assert abs(c[1] - 0.5) < 1e-12
    assert c[2] == 0.0 and c[3] == 0.0 and c[4] == 0.0


def test_pair_list_respects_cutoff():
    pos = np.array([[0.0, 0, 0], [1.0, 0, 0], [30.0, 0, 0]])
    src, dst, dist = nn.pair_list(pos, 10.0)
    assert sorted(zip(src.tolist(), dst.tolist())) == [(0, 1), (1, 0)]
    assert np.allclose(dist, 1.0)


# -- interaction block --------------------------------------------------------


def make_interaction(rng_seed=21, dim=5):
    rng = np.random.default_rng(rng_seed)
    layer = nn.Interaction(rng, dim=dim, n_gaussians=6, cutoff=10.0, d_max=15.0)
    return rng, layer


def test_interaction_single_atom_self_term_only():
    rng, layer = make_interaction()
    feats = Tensor(rng.normal(size=(1, 5)))
    src, dst, dist = nn.pair_list(np.zeros((1, 3)), 10.0)
    out = layer(feats, src, dst, dist).data

    zero_in = Tensor(np.zeros((1, 5)))
    self_term = layer.out2(nn.shifted_softplus(layer.out1(zero_in))).data
    assert np.allclose(out, feats.data + self_term, atol=1e-12)


def test_interaction_beyond_cutoff_matches_isolated():
    rng, layer = make_interaction(22)
    feats = Tensor(rng.normal(size=(2, 5)))
    pos = np.array([[0.0, 0, 0], [50.0, 0, 0]])
    src, dst, dist = nn.pair_list(pos, 10.0)
    together = layer(feats, src, dst, dist).data

    for i in range(2):
        solo = layer(Tensor(feats.data[i : i + 1]), *nn.pair_list(pos[i : i + 1], 10.0)).data
        assert np.allclose(together[i], solo[0], atol=1e-12)


def test_interaction_rigid_motion_invariance():
    rng, layer = make_interaction(23)
    n = 7
    feats = Tensor(rng.normal(size=(n, 5)))
    pos = rng.normal(size=(n, 3)) * 3.0
    base = layer(feats, *nn.pair_list(pos, 10.0)).data

    q, _ = np.linalg.qr(rng.normal(size=(3, 3)))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    moved = pos @ q.T + np.array([4.0, -2.0, 11.0])
    rotated = layer(feats, *nn.pair_list(moved, 10.0)).data
    assert np.max(np.abs(base - rotated)) < 1e-10


def test_gradcheck_interaction():
    rng, layer = make_interaction(24)
    feats_data = rng.normal(size=(4, 5))
    pos = rng.normal(size=(4, 3)) * 2.0
    src, dst, dist = nn.pair_list(pos, 10.0)

    def loss():
        out = layer(Tensor(feats_data), src, dst, dist)
        return nn.tensor_sum(out * out)

    assert_gradcheck(loss, layer.parameters())


# -- graph attention ----------------------------------------------------------


def naive_attention(layer, feats, src, dst):
    n = feats.shape[0]
    incoming = {i: [(j, i) for j, k in zip(src, dst) if k == i] + [(i, i)] for i in range(n)}
    blocks = []
    for h in range(layer.heads):
        projected = feats @ layer.proj[h].weight.data + layer.proj[h].bias.data
        a_src = layer.attn_src[h].data[:, 0]
        a_dst = layer.attn_dst[h].data[:, 0]
        out = np.zeros((n, layer.dim))
        for i in range(n):
            neighbors = [j for j, _ in incoming[i]]
            raw = np.array(
                [np.logaddexp(0.0, projected[j] @ a_src + projected[i] @ a_dst) - math.log(2.0)
                 for j in neighbors]
            )
            weights = np.exp(raw - raw.max())
            weights /= weights.sum()
            out[i] = sum(w * projected[j] for w, j in zip(weights, neighbors))
        blocks.append(out)
    return np.concatenate(blocks, axis=1)


def test_attention_single_node_weight_one():
    rng = np.random.default_rng(31)
    layer = nn.GraphAttention(rng, n_in=6, dim=4, heads=2)
    feats = Tensor(rng.normal(size=(1, 6)))
    empty = np.zeros(0, dtype=np.int64)
    out = layer(feats, empty, empty).data
    expected = np.concatenate(
        [feats.data @ layer.proj[h].weight.data + layer.proj[h].bias.data for h in range(2)],
        axis=1,
    )
    assert np.allclose(out, expected, atol=1e-12)


def test_attention_symmetric_nodes_agree():
    rng = np.random.default_rng(32)
    layer = nn.GraphAttention(rng, n_in=5, dim=3, heads=2)
    row = rng.normal(size=5)
    feats = Tensor(np.stack([row, row]))
    src = np.array([0, 1])
    dst = np.array([1, 0])
    out = layer(feats, src, dst).data
    assert np.allclose(out[0], out[1], atol=1e-12)


def test_attention_matches_dense_reference():
    rng = np.random.default_rng(33)
    layer = nn.GraphAttention(rng, n_in=4, dim=5, heads=3)
    n = 6
    feats = rng.normal(size=(n, 4))
    src, dst = np.nonzero(~np.eye(n, dtype=bool))
    out = layer(Tensor(feats), src.astype(np.int64), dst.astype(np.int64)).data
    ref = naive_attention(layer, feats, src, dst)
    assert np.max(np.abs(out - ref)) < 1e-9


def test_attention_permutation_equivariant():
    rng = np.random.default_rng(34)
    layer = nn.GraphAttention(rng, n_in=4, dim=3, heads=2)
    n = 5
    feats = rng.normal(size=(n, 4))
    src = np.array([0, 1, 2, 3, 4, 0], dtype=np.int64)
    dst = np.array([1, 2, 3, 4, 0, 2], dtype=np.int64)
    base = layer(Tensor(feats), src, dst).data

    perm = rng.permutation(n)
    feats_p = np.empty_like(feats)
    feats_p[perm] = feats
    out_p = layer(Tensor(feats_p), perm[src], perm[dst]).data
    assert np.max(np.abs(out_p[perm] - base)) < 1e-9


def test_gradcheck_attention():
    rng = np.random.default_rng(35)
    layer = nn.GraphAttention(rng, n_in=3, dim=3, heads=2)
    feats = rng.normal(size=(4, 3))
    src = np.array([0, 1, 2, 3], dtype=np.int64)
    dst = np.array([1, 2, 3, 0], dtype=np.int64)

    def loss():
        out = layer(Tensor(feats), src, dst)
        return nn.tensor_sum(out * out)

    assert_gradcheck(loss, layer.parameters())


# -- dense, embedding, composed ------------------------------------------------


def test_gradcheck_dense():
    rng = np.random.default_rng(41)
    layer = nn.Dense(rng, 4, 3)
    x = rng.normal(size=(5, 4))

    def loss():
        return nn.tensor_sum(nn.power(layer(Tensor(x)), 2.0))

    assert_gradcheck(loss, layer.parameters())


def test_gradcheck_embedding():
    rng = np.random.default_rng(42)
    layer = nn.Embedding(rng, 6, 4)
    idx = np.array([0, 2, 2, 5])

    def loss():
        return nn.tensor_sum(nn.power(layer(idx), 2.0))

    assert_gradcheck(loss, layer.parameters())


def test_zero_init_dense_outputs_zero():
    rng = np.random.default_rng(43)
    layer = nn.Dense(rng, 4, 2, zero_init=True)
    out = layer(Tensor(rng.normal(size=(3, 4)))).data
    assert np.array_equal(out, np.zeros((3, 2)))


def test_gradcheck_composed_stack():
    rng = np.random.default_rng(44)
    embed = nn.Embedding(rng, 4, 5)
    inter = nn.Interaction(rng, dim=5, n_gaussians=6, cutoff=10.0, d_max=15.0)
    attn = nn.GraphAttention(rng, n_in=5, dim=3, heads=2)
    head = nn.Dense(rng, 6, 3)

    species = np.array([0, 1, 2, 3])
    pos = np.random.default_rng(45).normal(size=(4, 3)) * 2.0
    src, dst, dist = nn.pair_list(pos, 10.0)
    labels = np.array([0, 2, 1, 1])
    onehot = np.zeros((4, 3))
    onehot[np.arange(4), labels] = 1.0

    def loss():
        feats = embed(species)
        feats = inter(feats, src, dst, dist)
        feats = attn(feats, src, dst)
        logits = head(feats)
        return -nn.tensor_sum(nn.log_softmax(logits) * onehot)

    params = embed.parameters() + inter.parameters() + attn.parameters() + head.parameters()
    assert_gradcheck(loss, params)


def test_named_parameters_are_unique_and_complete():
    rng = np.random.default_rng(46)
    inter = nn.Interaction(rng, dim=5, n_gaussians=6, cutoff=10.0, d_max=15.0)
    names = [name for name, _ in inter.named_parameters()]
    assert len(names) == len(set(names))
    assert len(names) == 10  # five dense sublayers, weight and bias each


# -- optimizer and scheduler ---------------------------------------------------


def test_adam_zero_grad_is_noop():
    p = Tensor(np.array([1.0, 2.0]), requires_grad=True)
    opt = nn.Adam([p], lr=0.1)
    before = p.data.copy()
    opt.step()
    assert np.array_equal(p.data, before)


def test_adam_zero_lr_is_noop():
    p = Tensor(np.array([1.0, 2.0]), requires_grad=True)
    opt = nn.Adam([p], lr=0.0)
    p.grad = np.array([5.0, -3.0])
    opt.step()
    assert np.array_equal(p.data, np.array([1.0, 2.0]))


def test_adam_shape_mismatch_errors():
    p = Tensor(np.array([1.0, 2.0]), requires_grad=True)
    opt = nn.Adam([p])
    p.grad = np.zeros(3)
    with pytest.raises(TensorError, match="shape"):
        opt.step()


def test_adam_descends_quadratic():
    p = Tensor(np.array([5.0]), requires_grad=True)
    opt = nn.Adam([p], lr=0.05)
    for _ in range(400):
        opt.zero_grad()
        with Tape():
            backward(nn.tensor_sum(p * p))
        opt.step()
    assert abs(p.data[0]) < 0.05


def test_plateau_scheduler_halves_after_ten_stagnant():
    p = Tensor(np.array([0.0]), requires_grad=True)
    opt = nn.Adam([p], lr=1e-4)
    sched = nn.PlateauScheduler(opt, patience=10, decay=0.5, min_lr=1e-6)
    sched.step(1.0)  # first observation becomes the best
    for i in range(9):
        assert sched.step(1.0) is False
        assert opt.lr == 1e-4
    assert sched.step(1.0) is True
    assert opt.lr == 5e-5


def test_plateau_scheduler_improvement_resets():
    opt = nn.Adam([Tensor(np.zeros(1), requires_grad=True)], lr=1e-4)
    sched = nn.PlateauScheduler(opt, patience=10)
    sched.step(1.0)
    for _ in range(9):
        sched.step(1.0)
    sched.step(0.5)  # strict improvement resets the stagnation count
    for _ in range(9):
        assert sched.step(0.5) is False
    assert opt.lr == 1e-4


def test_plateau_scheduler_floors_at_min_lr():
    opt = nn.Adam([Tensor(np.zeros(1), requires_grad=True)], lr=1.6e-6)
    sched = nn.PlateauScheduler(opt, patience=1, decay=0.5, min_lr=1e-6)
    sched.step(1.0)
    sched.step(1.0)
    assert opt.lr == 1e-6
    assert sched.step(1.0) is False
    assert opt.lr == 1e-6


# -- checkpoints ---------------------------------------------------------------


def test_checkpoint_roundtrip(tmp_path):
    rng = np.random.default_rng(51)
    model = nn.Interaction(rng, dim=4, n_gaussians=5, cutoff=10.0, d_max=15.0)
    opt = nn.Adam(model.parameters(), lr=3e-4)

    feats = Tensor(rng.normal(size=(3, 4)))
    pos = rng.normal(size=(3, 3))
    with Tape():
        out = model(feats, *nn.pair_list(pos, 10.0))
        backward(nn.tensor_sum(out * out))
    opt.step()

    snapshot = {name: p.data.copy() for name, p in model.named_parameters()}
    path = tmp_path / "model.npz"
    nn.save_checkpoint(path, model, opt, config_hash="cafe01")

    for p in model.parameters():
        p.data = p.data + 1.0
    opt.lr = 999.0

    fresh_opt = nn.Adam(model.parameters())
    stored_hash = nn.load_checkpoint(path, model, fresh_opt)
    assert stored_hash == "cafe01"
    assert fresh_opt.lr == 3e-4
    assert fresh_opt.t == 1
    for name, p in model.named_parameters():
        assert np.array_equal(p.data, snapshot[name])


def test_checkpoint_name_mismatch_errors(tmp_path):
    rng = np.random.default_rng(52)
    small = nn.Dense(rng, 3, 2)
    path = tmp_path / "dense.npz"
    nn.save_checkpoint(path, small)
    other = nn.Embedding(rng, 3, 2)
    with pytest.raises(nn.CheckpointError, match="mismatch"):
        nn.load_checkpoint(path, other)


def test_checkpoint_shape_mismatch_errors(tmp_path):
    rng = np.random.default_rng(53)
    path = tmp_path / "dense.npz"
    nn.save_checkpoint(path, nn.Dense(rng, 3, 2))
    with pytest.raises(nn.CheckpointError, match="shape"):
        nn.load_checkpoint(path, nn.Dense(rng, 3, 4))


def test_checkpoint_records_format_version(tmp_path):
    rng = np.random.default_rng(54)
    path = tmp_path / "dense.npz"
    nn.save_checkpoint(path, nn.Dense(rng, 2, 2))
    with np.load(path) as archive:
        assert archive["format_version"][0] == 1
