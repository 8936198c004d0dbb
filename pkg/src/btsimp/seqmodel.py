"""Shared-encoder, dual-decoder sequence model with exact analytic gradients.

One GRU encoder is shared by both complexity sides; each side owns a GRU
decoder with content-based (bilinear) attention over the encoder states and
a per-side output bias. The token embedding table and the output projection
matrix are shared. Everything runs in float64 numpy with hand-derived
backpropagation so gradients can be verified against finite differences.

Directions are the strings "s->s", "c->c", "s->c", "c->s"; the character
after the arrow selects the decoder.

The vocabulary is closed: encoding an out-of-vocabulary token raises
UnknownToken rather than mapping to an UNK embedding.
"""

from __future__ import annotations

import hashlib
import io
import json
import zipfile
from dataclasses import dataclass, field

import numpy as np

from .errors import CheckpointError, NumericError, RangeError, UnknownToken
from .textcore import RandomSource, Sentence, Vocabulary, make_rng

BOS = "<s>"
EOS = "</s>"
BOS_ID = 0
EOS_ID = 1

DIRECTIONS = ("s->s", "c->c", "s->c", "c->s")

CHECKPOINT_VERSION = 1


@dataclass
class DualDecoderModel:
    tokens: tuple[str, ...]
    hidden_dim: int
    params: dict[str, np.ndarray]
    token_ids: dict[str, int] = field(init=False)

    def __post_init__(self):
        self.token_ids = {t: i for i, t in enumerate(self.tokens)}

    @property
    def vocab_size(self) -> int:
        return len(self.tokens)

    def encode_tokens(self, sentence: Sentence) -> list[int]:
        ids = []
        for token in sentence:
            idx = self.token_ids.get(token)
            if idx is None:
                raise UnknownToken(f"token {token!r} is not in the model vocabulary")
            ids.append(idx)
        return ids

    def decode_ids(self, ids) -> Sentence:
        return tuple(self.tokens[i] for i in ids)


def _glorot(rng: RandomSource, rows: int, cols: int) -> np.ndarray:
    scale = np.sqrt(6.0 / (rows + cols))
    return rng.gen.uniform(-scale, scale, size=(rows, cols))


def init_model(vocab: Vocabulary, hidden_dim: int = 64, seed: int = 0) -> DualDecoderModel:
    """Deterministically initialize all parameters from the given seed."""
    if hidden_dim < 4:
        raise RangeError(f"hidden_dim must be >= 4, got {hidden_dim}")
    tokens = (BOS, EOS) + tuple(sorted(vocab.counts))
    v = len(tokens)
    h = hidden_dim
    rng = make_rng(seed, stream=0)
    params: dict[str, np.ndarray] = {
        "emb": _glorot(rng, v, h),
        "enc_Wx": _glorot(rng, 3 * h, h),
        "enc_Wh": _glorot(rng, 3 * h, h),
        "enc_b": np.zeros(3 * h),
        "out_W": _glorot(rng, v, h),
    }
    for side in ("s", "c"):
        params[f"dec_{side}_Wx"] = _glorot(rng, 3 * h, h)
        params[f"dec_{side}_Wh"] = _glorot(rng, 3 * h, h)
        params[f"dec_{side}_b"] = np.zeros(3 * h)
        params[f"dec_{side}_Wa"] = _glorot(rng, h, h)
        params[f"dec_{side}_Wc"] = _glorot(rng, h, 2 * h)
        params[f"dec_{side}_bc"] = np.zeros(h)
        params[f"dec_{side}_bo"] = np.zeros(v)
    return DualDecoderModel(tokens, hidden_dim, params)


def zero_grads(model: DualDecoderModel) -> dict[str, np.ndarray]:
    return {k: np.zeros_like(v) for k, v in model.params.items()}


def _sigmoid(x):
    return 1.0 / (1.0 + np.exp(-x))


def _gru_step(Wx, Wh, b, x, h):
    """Returns new hidden state and the cache needed for the backward pass."""
    hsz = h.shape[0]
    gx = Wx @ x + b
    gh = Wh @ h
    z = _sigmoid(gx[:hsz] + gh[:hsz])
    r = _sigmoid(gx[hsz : 2 * hsz] + gh[hsz : 2 * hsz])
    hh_n = gh[2 * hsz :]
    n = np.tanh(gx[2 * hsz :] + r * hh_n)
    h_new = (1.0 - z) * n + z * h
    return h_new, (x, h, z, r, n, hh_n)


def _gru_backward(Wx, Wh, cache, dh_new, grads, wx_name, wh_name, b_name):
    """Accumulates parameter grads; returns (dx, dh_prev)."""
    x, h, z, r, n, hh_n = cache
    dz = dh_new * (h - n)
    dn = dh_new * (1.0 - z)
    da_n = dn * (1.0 - n * n)
    dr = da_n * hh_n
    dhh_n = da_n * r
    da_z = dz * z * (1.0 - z)
    da_r = dr * r * (1.0 - r)
    dgx = np.concatenate([da_z, da_r, da_n])
    dgh = np.concatenate([da_z, da_r, dhh_n])
    grads[wx_name] += np.outer(dgx, x)
    grads[b_name] += dgx
    grads[wh_name] += np.outer(dgh, h)
    dx = Wx.T @ dgx
    dh_prev = Wh.T @ dgh + dh_new * z
    return dx, dh_prev


def _encode(model: DualDecoderModel, src_ids):
    p = model.params
    h = np.zeros(model.hidden_dim)
    states = []
    caches = []
    for idx in src_ids:
        h, cache = _gru_step(p["enc_Wx"], p["enc_Wh"], p["enc_b"], p["emb"][idx], h)
        states.append(h)
        caches.append(cache)
    return np.array(states), caches


def _encoder_backward(model, src_ids, caches, d_states, grads):
    p = model.params
    dh = np.zeros(model.hidden_dim)
    for t in range(len(src_ids) - 1, -1, -1):
        dx, dh = _gru_backward(
            p["enc_Wx"], p["enc_Wh"], caches[t], d_states[t] + dh,
            grads, "enc_Wx", "enc_Wh", "enc_b",
        )
        grads["emb"][src_ids[t]] += dx


def _log_softmax(logits):
    m = logits.max()
    shifted = logits - m
    lse = m + np.log(np.exp(shifted).sum())
    return logits - lse


def _decoder_step(model, side, enc_states, prev_id, h):
    """One decoder step; returns (logits, new hidden, cache)."""
    p = model.params
    pre = f"dec_{side}_"
    h_new, gru_cache = _gru_step(p[pre + "Wx"], p[pre + "Wh"], p[pre + "b"], p["emb"][prev_id], h)
    q = p[pre + "Wa"] @ h_new
    scores = enc_states @ q
    scores = scores - scores.max()
    alpha = np.exp(scores)
    alpha /= alpha.sum()
    ctx = alpha @ enc_states
    concat = np.concatenate([h_new, ctx])
    comb = np.tanh(p[pre + "Wc"] @ concat + p[pre + "bc"])
    logits = p["out_W"] @ comb + p[pre + "bo"]
    cache = (prev_id, gru_cache, q, alpha, ctx, concat, comb, h_new)
    return logits, h_new, cache


def _forced_pass(model, src_ids, tgt_ids, side, include_eos, compute_grad, grads=None):
    """Teacher-forced scoring of target ids given source ids.

    Returns (total negative log-likelihood, number of events). Events are
    the target tokens plus, when include_eos, the end-of-sentence step.
    When compute_grad is set, parameter gradients of the TOTAL (summed)
    NLL are accumulated into ``grads``.
    """
    enc_states, enc_caches = _encode(model, src_ids)
    inputs = [BOS_ID] + list(tgt_ids)
    targets = list(tgt_ids) + ([EOS_ID] if include_eos else [])
    if not include_eos:
        inputs = inputs[:-1]
    h = np.zeros(model.hidden_dim)
    caches = []
    dlogits_steps = []
    total_nll = 0.0
    for prev_id, tgt in zip(inputs, targets):
        logits, h, cache = _decoder_step(model, side, enc_states, prev_id, h)
        logp = _log_softmax(logits)
        total_nll -= logp[tgt]
        if compute_grad:
            dlog = np.exp(logp)
            dlog[tgt] -= 1.0
            dlogits_steps.append(dlog)
            caches.append(cache)
    if compute_grad:
        d_enc = np.zeros_like(enc_states)
        dh = np.zeros(model.hidden_dim)
        p = model.params
        pre = f"dec_{side}_"
        for t in range(len(targets) - 1, -1, -1):
            prev_id, gru_cache, q, alpha, ctx, concat, comb, h_new = caches[t]
            dlogits = dlogits_steps[t]
            grads["out_W"] += np.outer(dlogits, comb)
            grads[pre + "bo"] += dlogits
            dcomb = p["out_W"].T @ dlogits
            dpre_act = dcomb * (1.0 - comb * comb)
            grads[pre + "Wc"] += np.outer(dpre_act, concat)
            grads[pre + "bc"] += dpre_act
            dconcat = p[pre + "Wc"].T @ dpre_act
            hsz = model.hidden_dim
            dh_new = dconcat[:hsz] + dh
            dctx = dconcat[hsz:]
            dalpha = enc_states @ dctx
            d_enc += np.outer(alpha, dctx)
            dscores = alpha * (dalpha - alpha @ dalpha)
            dq = enc_states.T @ dscores
            d_enc += np.outer(dscores, q)
            grads[pre + "Wa"] += np.outer(dq, h_new)
            dh_new = dh_new + p[pre + "Wa"].T @ dq
            dx, dh = _gru_backward(
                p[pre + "Wx"], p[pre + "Wh"], gru_cache, dh_new,
                grads, pre + "Wx", pre + "Wh", pre + "b",
            )
            grads["emb"][inputs[t]] += dx
        _encoder_backward(model, src_ids, enc_caches, d_enc, grads)
    return total_nll, len(targets)


# --------------------------------------------------------------------------
# Batched teacher forcing. Semantically identical to mapping _forced_pass
# over the pairs (verified by an equivalence test); exists because batched
# matmuls amortize interpreter overhead in the training hot loop.
# --------------------------------------------------------------------------


def _gru_step_batch(Wx, Wh, b, X, H):
    hsz = H.shape[1]
    GX = X @ Wx.T + b
    GH = H @ Wh.T
    z = _sigmoid(GX[:, :hsz] + GH[:, :hsz])
    r = _sigmoid(GX[:, hsz : 2 * hsz] + GH[:, hsz : 2 * hsz])
    hh_n = GH[:, 2 * hsz :]
    n = np.tanh(GX[:, 2 * hsz :] + r * hh_n)
    H_new = (1.0 - z) * n + z * H
    return H_new, (X, H, z, r, n, hh_n)


def _gru_backward_batch(Wx, Wh, cache, dH_new, grads, wx_name, wh_name, b_name):
    X, H, z, r, n, hh_n = cache
    dz = dH_new * (H - n)
    dn = dH_new * (1.0 - z)
    da_n = dn * (1.0 - n * n)
    dr = da_n * hh_n
    dhh_n = da_n * r
    da_z = dz * z * (1.0 - z)
    da_r = dr * r * (1.0 - r)
    dGX = np.concatenate([da_z, da_r, da_n], axis=1)
    dGH = np.concatenate([da_z, da_r, dhh_n], axis=1)
    grads[wx_name] += dGX.T @ X
    grads[b_name] += dGX.sum(axis=0)
    grads[wh_name] += dGH.T @ H
    dX = dGX @ Wx
    dH_prev = dGH @ Wh + dH_new * z
    return dX, dH_prev


def _encode_batch(model, src_ids_list):
    """Right-padded batch encoding; padded positions are masked by callers."""
    p = model.params
    batch = len(src_ids_list)
    lengths = np.array([len(ids) for ids in src_ids_list])
    t_max = int(lengths.max())
    ids = np.zeros((batch, t_max), dtype=int)
    for row, src in enumerate(src_ids_list):
        ids[row, : len(src)] = src
    mask = np.arange(t_max)[None, :] < lengths[:, None]
    H = np.zeros((batch, model.hidden_dim))
    states = np.empty((batch, t_max, model.hidden_dim))
    caches = []
    for t in range(t_max):
        H, cache = _gru_step_batch(p["enc_Wx"], p["enc_Wh"], p["enc_b"], p["emb"][ids[:, t]], H)
        states[:, t, :] = H
        caches.append(cache)
    return states, mask, ids, caches


def _encoder_backward_batch(model, ids, caches, d_states, grads):
    p = model.params
    batch, t_max, _ = d_states.shape
    dH = np.zeros((batch, model.hidden_dim))
    for t in range(t_max - 1, -1, -1):
        dX, dH = _gru_backward_batch(
            p["enc_Wx"], p["enc_Wh"], caches[t], d_states[:, t, :] + dH,
            grads, "enc_Wx", "enc_Wh", "enc_b",
        )
        np.add.at(grads["emb"], ids[:, t], dX)


def _decoder_step_batch(model, side, enc_states, enc_mask, prev_ids, H):
    p = model.params
    pre = f"dec_{side}_"
    H_new, gru_cache = _gru_step_batch(
        p[pre + "Wx"], p[pre + "Wh"], p[pre + "b"], p["emb"][prev_ids], H
    )
    q = H_new @ p[pre + "Wa"].T
    scores = np.einsum("bth,bh->bt", enc_states, q)
    scores = np.where(enc_mask, scores, -np.inf)
    scores = scores - scores.max(axis=1, keepdims=True)
    alpha = np.exp(scores)
    alpha /= alpha.sum(axis=1, keepdims=True)
    ctx = np.einsum("bt,bth->bh", alpha, enc_states)
    concat = np.concatenate([H_new, ctx], axis=1)
    comb = np.tanh(concat @ p[pre + "Wc"].T + p[pre + "bc"])
    logits = comb @ p["out_W"].T + p[pre + "bo"]
    cache = (prev_ids, gru_cache, q, alpha, concat, comb, H_new)
    return logits, H_new, cache


def _log_softmax_batch(logits):
    m = logits.max(axis=1, keepdims=True)
    shifted = logits - m
    lse = m + np.log(np.exp(shifted).sum(axis=1, keepdims=True))
    return logits - lse


def batch_nll_and_grad(model: DualDecoderModel, pairs, direction: str):
    """Mean per-example teacher-forced NLL over (source, target) pairs.

    Matches averaging nll_and_grad over the pairs: each example's loss is
    its per-event mean, and the batch loss (and gradient) is the mean over
    examples. Returns (loss, grads).
    """
    if direction not in DIRECTIONS:
        raise ValueError(f"unknown direction {direction!r}")
    if not pairs:
        raise RangeError("need at least one (source, target) pair")
    side = direction[-1]
    p = model.params
    pre = f"dec_{side}_"
    src_ids_list = [model.encode_tokens(src) for src, _ in pairs]
    tgt_ids_list = [model.encode_tokens(tgt) for _, tgt in pairs]
    if any(len(ids) == 0 for ids in src_ids_list + tgt_ids_list):
        raise RangeError("sources and targets must be non-empty")
    batch = len(pairs)
    enc_states, enc_mask, enc_ids, enc_caches = _encode_batch(model, src_ids_list)

    events = np.array([len(ids) + 1 for ids in tgt_ids_list])
    t_dec = int(events.max())
    inputs = np.zeros((batch, t_dec), dtype=int)
    targets = np.full((batch, t_dec), EOS_ID, dtype=int)
    inputs[:, 0] = BOS_ID
    for row, ids in enumerate(tgt_ids_list):
        inputs[row, 1 : len(ids) + 1] = ids
        targets[row, : len(ids)] = ids
    active = np.arange(t_dec)[None, :] < events[:, None]
    # Per-event weight reproducing mean-of-per-example-means.
    weights = np.where(active, 1.0 / (batch * events[:, None]), 0.0)

    H = np.zeros((batch, model.hidden_dim))
    caches = []
    dlogits_steps = []
    loss = 0.0
    rows = np.arange(batch)
    for t in range(t_dec):
        logits, H, cache = _decoder_step_batch(model, side, enc_states, enc_mask, inputs[:, t], H)
        logp = _log_softmax_batch(logits)
        loss -= (logp[rows, targets[:, t]] * weights[:, t]).sum()
        dlog = np.exp(logp)
        dlog[rows, targets[:, t]] -= 1.0
        dlog *= weights[:, t][:, None]
        dlogits_steps.append(dlog)
        caches.append(cache)

    grads = zero_grads(model)
    d_enc = np.zeros_like(enc_states)
    dH = np.zeros((batch, model.hidden_dim))
    for t in range(t_dec - 1, -1, -1):
        prev_ids, gru_cache, q, alpha, concat, comb, H_new = caches[t]
        dlogits = dlogits_steps[t]
        grads["out_W"] += dlogits.T @ comb
        grads[pre + "bo"] += dlogits.sum(axis=0)
        dcomb = dlogits @ p["out_W"]
        dpre_act = dcomb * (1.0 - comb * comb)
        grads[pre + "Wc"] += dpre_act.T @ concat
        grads[pre + "bc"] += dpre_act.sum(axis=0)
        dconcat = dpre_act @ p[pre + "Wc"]
        hsz = model.hidden_dim
        dH_new = dconcat[:, :hsz] + dH
        dctx = dconcat[:, hsz:]
        dalpha = np.einsum("bth,bh->bt", enc_states, dctx)
        d_enc += alpha[:, :, None] * dctx[:, None, :]
        dscores = alpha * (dalpha - (alpha * dalpha).sum(axis=1, keepdims=True))
        dq = np.einsum("bt,bth->bh", dscores, enc_states)
        d_enc += dscores[:, :, None] * q[:, None, :]
        grads[pre + "Wa"] += dq.T @ H_new
        dH_new = dH_new + dq @ p[pre + "Wa"]
        dX, dH = _gru_backward_batch(
            p[pre + "Wx"], p[pre + "Wh"], gru_cache, dH_new,
            grads, pre + "Wx", pre + "Wh", pre + "b",
        )
        np.add.at(grads["emb"], prev_ids, dX)
    _encoder_backward_batch(model, enc_ids, enc_caches, d_enc, grads)
    return loss, grads


def decode_greedy_batch(model, sources, direction, max_len=None, min_len: int = 1):
    """Batched greedy decoding; row-identical to decode_greedy per source."""
    if direction not in DIRECTIONS:
        raise ValueError(f"unknown direction {direction!r}")
    if not sources:
        return []
    side = direction[-1]
    src_ids_list = [model.encode_tokens(src) for src in sources]
    enc_states, enc_mask, _ids, _caches = _encode_batch(model, src_ids_list)
    batch = len(sources)
    limits = np.array(
        [max_len if max_len is not None else default_max_len(src) for src in sources]
    )
    if np.any(limits < 1):
        raise RangeError("max_len must be >= 1")
    H = np.zeros((batch, model.hidden_dim))
    prev = np.full(batch, BOS_ID, dtype=int)
    alive = np.ones(batch, dtype=bool)
    ended = np.zeros(batch, dtype=bool)
    out_tokens = [[] for _ in range(batch)]
    out_logprobs = [[] for _ in range(batch)]
    step = 0
    while np.any(alive) and step < int(limits.max()):
        logits, H, _cache = _decoder_step_batch(model, side, enc_states, enc_mask, prev, H)
        if step < min_len:
            logits = logits.copy()
            logits[:, EOS_ID] = -np.inf
        logp = _log_softmax_batch(logits)
        picks = np.argmax(logp, axis=1)
        for row in range(batch):
            if not alive[row]:
                continue
            idx = int(picks[row])
            out_logprobs[row].append(float(logp[row, idx]))
            if idx == EOS_ID:
                ended[row] = True
                alive[row] = False
            else:
                out_tokens[row].append(idx)
                prev[row] = idx
                if len(out_tokens[row]) >= limits[row]:
                    alive[row] = False
        step += 1
    return [
        DecodeOutput(model.decode_ids(out_tokens[row]), tuple(out_logprobs[row]), bool(ended[row]))
        for row in range(batch)
    ]


def nll_and_grad(model: DualDecoderModel, source: Sentence, target: Sentence, direction: str):
    """Per-token teacher-forced NLL of target given source, with exact grads.

    The loss is averaged over target events (target tokens plus the
    end-of-sentence step); gradients are of the averaged loss.
    """
    if direction not in DIRECTIONS:
        raise ValueError(f"unknown direction {direction!r}")
    if not source or not target:
        raise RangeError("source and target must be non-empty")
    src_ids = model.encode_tokens(source)
    tgt_ids = model.encode_tokens(target)
    side = direction[-1]
    grads = zero_grads(model)
    total_nll, n_events = _forced_pass(model, src_ids, tgt_ids, side, True, True, grads)
    for g in grads.values():
        g /= n_events
    return total_nll / n_events, grads


def sequence_nll(model, source, target, direction, include_eos: bool = True) -> float:
    """Total (summed) NLL of the target event sequence; no gradients."""
    src_ids = model.encode_tokens(source)
    tgt_ids = model.encode_tokens(target)
    nll, _ = _forced_pass(model, src_ids, tgt_ids, direction[-1], include_eos, False)
    return nll


@dataclass(frozen=True)
class DecodeOutput:
    tokens: Sentence
    token_logprobs: tuple[float, ...]
    ended_with_eos: bool

    def total_logprob(self) -> float:
        return float(sum(self.token_logprobs))


def default_max_len(source: Sentence) -> int:
    return 2 * len(source) + 5


def _generate(model, source, direction, max_len, min_len, pick):
    if direction not in DIRECTIONS:
        raise ValueError(f"unknown direction {direction!r}")
    if max_len < 1:
        raise RangeError(f"max_len must be >= 1, got {max_len}")
    side = direction[-1]
    src_ids = model.encode_tokens(source)
    enc_states, _ = _encode(model, src_ids)
    h = np.zeros(model.hidden_dim)
    prev = BOS_ID
    out_ids: list[int] = []
    logprobs: list[float] = []
    ended = False
    while len(out_ids) < max_len:
        logits, h, _cache = _decoder_step(model, side, enc_states, prev, h)
        if len(out_ids) < min_len:
            logits = logits.copy()
            logits[EOS_ID] = -np.inf
        logp = _log_softmax(logits)
        idx = pick(logp)
        logprobs.append(float(logp[idx]))
        if idx == EOS_ID:
            ended = True
            break
        out_ids.append(idx)
        prev = idx
    return DecodeOutput(model.decode_ids(out_ids), tuple(logprobs), ended)


def decode_greedy(model, source, direction, max_len=None, min_len: int = 1) -> DecodeOutput:
    """Deterministic argmax decoding; ties break toward the lowest token id.

    min_len=1 (the default) masks end-of-sentence before any token has
    been produced, so greedy outputs are never empty; recorded logprobs
    refer to the masked distribution actually decoded from.
    """
    if max_len is None:
        max_len = default_max_len(source)
    return _generate(model, source, direction, max_len, min_len, lambda lp: int(np.argmax(lp)))


def decode_sample(model, source, direction, rng: RandomSource, max_len=None, min_len: int = 0) -> DecodeOutput:
    """Ancestral sampling from the per-step softmax (the exact policy)."""
    if max_len is None:
        max_len = default_max_len(source)

    def pick(logp):
        cdf = np.cumsum(np.exp(logp))
        u = rng.random() * cdf[-1]
        return int(np.searchsorted(cdf, u, side="right"))

    return _generate(model, source, direction, max_len, min_len, pick)


def pg_grad(model, source, sample: DecodeOutput, advantage: float, direction: str):
    """REINFORCE gradient: advantage times the gradient of -log P(sample).

    Equals nll_and_grad's gradient on (source, sample.tokens) scaled by
    advantage times the event count whenever the sample terminated with
    end-of-sentence.
    """
    if direction not in DIRECTIONS:
        raise ValueError(f"unknown direction {direction!r}")
    grads = zero_grads(model)
    if advantage == 0.0:
        return grads
    src_ids = model.encode_tokens(source)
    tgt_ids = model.encode_tokens(sample.tokens)
    _forced_pass(model, src_ids, tgt_ids, direction[-1], sample.ended_with_eos, True, grads)
    for g in grads.values():
        g *= advantage
    return grads


@dataclass
class AdamState:
    m: dict[str, np.ndarray]
    v: dict[str, np.ndarray]
    t: int = 0
    beta1: float = 0.5
    beta2: float = 0.999
    eps: float = 1e-8


def init_adam(model: DualDecoderModel, beta1: float = 0.5, beta2: float = 0.999) -> AdamState:
    return AdamState(
        m={k: np.zeros_like(p) for k, p in model.params.items()},
        v={k: np.zeros_like(p) for k, p in model.params.items()},
        beta1=beta1,
        beta2=beta2,
    )


def adam_step(model: DualDecoderModel, grads, state: AdamState, lr: float):
    """Bias-corrected Adam update, applied in place; returns (model, state)."""
    for k, g in grads.items():
        if not np.all(np.isfinite(g)):
            raise NumericError(f"non-finite gradient in parameter block {k!r}")
    state.t += 1
    b1c = 1.0 - state.beta1**state.t
    b2c = 1.0 - state.beta2**state.t
    for k, g in grads.items():
        state.m[k] = state.beta1 * state.m[k] + (1.0 - state.beta1) * g
        state.v[k] = state.beta2 * state.v[k] + (1.0 - state.beta2) * (g * g)
        m_hat = state.m[k] / b1c
        v_hat = state.v[k] / b2c
        model.params[k] -= lr * m_hat / (np.sqrt(v_hat) + state.eps)
    return model, state


def _vocab_hash(tokens) -> str:
    return hashlib.sha256("\n".join(tokens).encode("utf-8")).hexdigest()


def save_checkpoint(model: DualDecoderModel, state: AdamState, path) -> None:
    """Versioned self-describing container (zip of .npy arrays + JSON meta)."""
    meta = {
        "format_version": CHECKPOINT_VERSION,
        "hidden_dim": model.hidden_dim,
        "tokens": list(model.tokens),
        "vocab_hash": _vocab_hash(model.tokens),
        "adam": {"t": state.t, "beta1": state.beta1, "beta2": state.beta2, "eps": state.eps},
        "param_names": sorted(model.params),
    }
    arrays = {}
    for k in sorted(model.params):
        arrays[f"param__{k}"] = model.params[k]
        arrays[f"adam_m__{k}"] = state.m[k]
        arrays[f"adam_v__{k}"] = state.v[k]
    buf = io.BytesIO()
    np.savez(buf, __meta__=np.frombuffer(json.dumps(meta).encode("utf-8"), dtype=np.uint8), **arrays)
    with open(path, "wb") as fh:
        fh.write(buf.getvalue())


def load_checkpoint(path):
    """Inverse of save_checkpoint; bit-identical parameters and state."""
    try:
        with np.load(path) as data:
            meta = json.loads(bytes(data["__meta__"]).decode("utf-8"))
            if meta.get("format_version") != CHECKPOINT_VERSION:
                raise CheckpointError(
                    f"checkpoint {path} has format version {meta.get('format_version')}, "
                    f"expected {CHECKPOINT_VERSION}"
                )
            tokens = tuple(meta["tokens"])
            if _vocab_hash(tokens) != meta["vocab_hash"]:
                raise CheckpointError(f"vocabulary hash mismatch in {path}")
            params = {}
            m = {}
            v = {}
            for k in meta["param_names"]:
                params[k] = data[f"param__{k}"]
                m[k] = data[f"adam_m__{k}"]
                v[k] = data[f"adam_v__{k}"]
    except CheckpointError:
        raise
    except (OSError, KeyError, ValueError, zipfile.BadZipFile, json.JSONDecodeError) as exc:
        raise CheckpointError(f"cannot load checkpoint from {path}: {exc}") from exc
    model = DualDecoderModel(tokens, meta["hidden_dim"], params)
    adam = meta["adam"]
    state = AdamState(m=m, v=v, t=adam["t"], beta1=adam["beta1"], beta2=adam["beta2"], eps=adam["eps"])
    return model, state
