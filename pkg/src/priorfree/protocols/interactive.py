"""Multi-round simulations built from channel-simulation rounds.

``run_rst1``  one round against a given joint-type estimate.
``run_rst2``  estimation exchange, then one simulated round (two wire rounds).
``run_int2``  estimation exchange, then every round of an interactive spec (j+1 wire rounds).
``run_int3``  the first round simulated without the estimate, so j wire rounds.
"""
from __future__ import annotations

import numpy as np

from ..channels import Channel, InteractiveSpec, joint_with_messages
from ..typesets import TIE_EPS, empirical_type
from . import estimation
from .common import (Abort, ProtocolOutcome, ProtocolParams, Reader, TrialRandomness, Wire,
                     decode_type, encode_type, seed_message, type_width)
from .reverse_shannon import RstRound, classify, make_round, rst_receive, rst_send


def prefix_code(msgs: list, sizes) -> np.ndarray | None:
    """Per-position mixed-radix code of earlier messages, first message most significant."""
    if not msgs:
        return None
    code = np.zeros(len(msgs[0]), dtype=np.int64)
    for m, k in zip(msgs, sizes):
        code = code * k + np.asarray(m, dtype=np.int64)
    return code


def round_center(t_tilde: np.ndarray, spec: InteractiveSpec, i: int) -> np.ndarray:
    """Center over (sender input, receiver input, earlier messages) for round i."""
    head = InteractiveSpec(spec.x_size, spec.y_size, spec.channels[:i - 1]) if i > 1 else None
    joint = t_tilde if head is None else joint_with_messages(t_tilde, head).probs
    joint = joint.reshape(spec.x_size, spec.y_size, -1)
    return joint if i % 2 else joint.transpose(1, 0, 2)


def interactive_round(t_tilde, spec: InteractiveSpec, i: int, params: ProtocolParams) -> RstRound:
    delta_i = params.delta + (i - 1) * params.delta_prime
    return make_round(round_center(np.asarray(t_tilde, dtype=float), spec, i),
                      spec.channels[i - 1].flat(), delta_i, params, f"m{i}")


class _Run:
    """Book-keeping shared by the multi-round protocols (harness side)."""

    def __init__(self, name, x, y, spec, params, rand):
        self.name = name
        self.x, self.y = np.asarray(x, dtype=np.int64), np.asarray(y, dtype=np.int64)
        self.spec, self.params, self.rand = spec, params, rand
        self.wire = Wire()
        self.views = {"A": [], "B": []}
        self.rounds: list[dict] = []
        self.t = {"A": None, "B": None}

    def own(self, party):
        return self.x if party == "A" else self.y

    def prefix(self, party):
        return prefix_code(self.views[party], self.spec.message_sizes)

    def private(self, party):
        return self.rand.private_a if party == "A" else self.rand.private_b

    def send_round(self, i: int, rnd: RstRound) -> str:
        sender = "A" if i % 2 else "B"
        res = rst_send(rnd, self.own(sender), self.prefix(sender), self.rand, self.private(sender))
        self.views[sender].append(res.chosen)
        self.rounds.append({"round": i, "sender": sender, "bits": len(res.bits),
                            "comm_rate": rnd.comm_rate, "shared_rate": rnd.shared_rate})
        self._pending = (rnd, res)
        return res.bits

    def receive_round(self, i: int, rnd: RstRound, bits: str, own=None):
        receiver = "B" if i % 2 else "A"
        own = self.own(receiver) if own is None else own
        prefix = self.prefix(receiver)
        decoded = rst_receive(rnd, own, prefix, bits, self.rand)
        _, res = self._pending
        tag = classify(rnd, decoded, res.chosen, own, prefix)
        self.views[receiver].append(decoded)
        if tag is not None:
            raise Abort(tag, f"m{i}")

    def soundness(self, t_tilde, upto: int) -> dict:
        """Realised (x, y, m_<=i) type against p_<=i . t~, radius delta + i*delta'."""
        head = InteractiveSpec(self.spec.x_size, self.spec.y_size, self.spec.channels[:upto])
        center = joint_with_messages(t_tilde, head).probs
        arities = center.shape
        t = empirical_type(self.x, self.y, *self.views["B"][:upto], arities=arities)
        dist = float(np.abs(t.probs - center).sum())
        radius = self.params.delta + upto * self.params.delta_prime
        return {"round": upto, "l1": dist, "radius": radius, "ok": dist <= radius + TIE_EPS}

    def in_ball(self, t_tilde) -> bool:
        t = estimation.estimate_from_strings(self.x, self.y, self.spec.x_size, self.spec.y_size)
        return float(np.abs(t - t_tilde).sum()) <= self.params.delta + TIE_EPS

    def outcome(self, status, tag, t_tilde, extra=None) -> ProtocolOutcome:
        info = {"rounds": self.rounds}
        info.update(extra or {})
        return ProtocolOutcome(self.name, status, tag, list(self.views["B"]), list(self.views["A"]),
                               list(self.views["B"]), self.rand.ledger(self.wire), t_tilde=t_tilde,
                               info=info)


def _tag(run: _Run, err: Abort, first_round_with_estimate: int, t_tilde, multi: bool) -> str:
    tag = err.tag
    rnd_index = int(err.where[1:]) if err.where.startswith("m") else 0
    if rnd_index == first_round_with_estimate and t_tilde is not None and not run.in_ball(t_tilde):
        tag = "E_est"
    return f"{tag}@{err.where}" if multi and err.where else tag


def run_rst1(x, y, t_tilde, channel, params: ProtocolParams, rand: TrialRandomness,
             x_size: int, y_size: int) -> ProtocolOutcome:
    """One wire round simulating n uses of p(m|x) against the shared estimate t~."""
    ch = channel if isinstance(channel, Channel) else Channel(channel)
    spec = InteractiveSpec.one_way(ch, y_size)
    t_tilde = np.asarray(t_tilde, dtype=float)
    run = _Run("rst1", x, y, spec, params, rand)
    rnd = interactive_round(t_tilde, spec, 1, params)
    try:
        seed = seed_message(rand, "A")
        body = run.send_round(1, rnd)
        msg = run.wire.send("A", seed + body, "m1")
        run.receive_round(1, rnd, msg[len(seed):])
    except Abort as err:
        return run.outcome("abort", err.tag, t_tilde)
    return run.outcome("success", None, t_tilde)


def _estimation_round(run: _Run, params: ProtocolParams) -> tuple[str, np.ndarray]:
    """Round 1 of rst2/int2: Bob sends [seed] + s_B.  Returns (s_A bits, Alice's t~)."""
    spec, rand = run.spec, run.rand
    seed = seed_message(rand, "B")
    msg = run.wire.send("B", seed + estimation.bob_sb(run.y, spec.y_size, rand, params), "s_B")
    s_b = estimation.decode_symbols(msg[len(seed):], spec.y_size, params.m)
    s_a = estimation.local_string(run.x, estimation.sample_positions(rand, params))
    run.t["A"] = estimation.estimate_from_strings(s_a, s_b, spec.x_size, spec.y_size)
    return estimation.encode_symbols(s_a, spec.x_size), run.t["A"]


def _bob_estimate(run: _Run, sa_bits: str, params: ProtocolParams) -> np.ndarray:
    spec = run.spec
    s_a = estimation.decode_symbols(sa_bits, spec.x_size, params.m)
    s_b = estimation.local_string(run.y, estimation.sample_positions(run.rand, params))
    run.t["B"] = estimation.estimate_from_strings(s_a, s_b, spec.x_size, spec.y_size)
    return run.t["B"]


def _later_rounds(run: _Run, start: int, params: ProtocolParams, soundness: list):
    spec = run.spec
    for i in range(start, spec.j + 1):
        sender = "A" if i % 2 else "B"
        receiver = "B" if sender == "A" else "A"
        rnd_s = interactive_round(run.t[sender], spec, i, params)
        msg = run.wire.send(sender, run.send_round(i, rnd_s), f"m{i}")
        rnd_r = interactive_round(run.t[receiver], spec, i, params)
        run.receive_round(i, rnd_r, msg)
        soundness.append(run.soundness(run.t["B"], i))


def run_int2(x, y, spec: InteractiveSpec, params: ProtocolParams, rand: TrialRandomness,
             name: str = "int2") -> ProtocolOutcome:
    """Bob sends s_B; Alice sends s_A and the first simulated message; rounds alternate after."""
    run = _Run(name, x, y, spec, params, rand)
    soundness: list = []
    multi = spec.j > 1
    try:
        sa_bits, t_a = _estimation_round(run, params)
        rnd_a = interactive_round(t_a, spec, 1, params)
        body = run.send_round(1, rnd_a)
        msg = run.wire.send("A", sa_bits + body, "s_A+m1")
        rd = Reader(msg)
        t_b = _bob_estimate(run, rd.take(len(sa_bits)), params)
        rnd_b = interactive_round(t_b, spec, 1, params)
        run.receive_round(1, rnd_b, rd.take(len(msg) - rd.pos))
        soundness.append(run.soundness(t_b, 1))
        _later_rounds(run, 2, params, soundness)
    except Abort as err:
        return run.outcome("abort", _tag(run, err, 1, run.t["B"] if run.t["B"] is not None
                                         else run.t["A"], multi), run.t["B"],
                           {"soundness": soundness})
    return run.outcome("success", None, run.t["B"], {"soundness": soundness})


def run_rst2(x, y, channel, params: ProtocolParams, rand: TrialRandomness,
             x_size: int, y_size: int) -> ProtocolOutcome:
    """Estimation exchange followed by one simulated round: two wire rounds."""
    ch = channel if isinstance(channel, Channel) else Channel(channel)
    if ch.input_arities != (x_size,):
        raise ValueError("channel inputs must be Alice's alphabet")
    return run_int2(x, y, InteractiveSpec.one_way(ch, y_size), params, rand, name="rst2")


def run_int3(x, y, spec: InteractiveSpec, params: ProtocolParams,
             rand: TrialRandomness) -> ProtocolOutcome:
    """j wire rounds: the first message is simulated against t_x with no side information.

    Round 1 (Alice): [seed] + t_x + first simulated message + s_A.
    Round 2 (Bob):   s_B + second simulated message.  Later rounds as in run_int2.
    With j = 1 there is no estimation exchange at all.
    """
    run = _Run("int3", x, y, spec, params, rand)
    n, xs = params.n, spec.x_size
    soundness: list = []
    multi = spec.j > 1
    try:
        seed = seed_message(rand, "A")
        tx = np.bincount(run.x, minlength=xs)
        center_a = (tx / n)[:, None, None]
        rnd_a = make_round(center_a, spec.channels[0].flat(), params.delta, params, "m1")
        body = run.send_round(1, rnd_a)
        sa_bits = ""
        if spec.j > 1:
            s_a = estimation.local_string(run.x, estimation.sample_positions(rand, params))
            sa_bits = estimation.encode_symbols(s_a, xs)
        header = encode_type(tx, n)
        msg = run.wire.send("A", seed + header + body + sa_bits, "t_x+m1+s_A")
        rd = Reader(msg)
        rd.take(len(seed))
        tx_b = decode_type(rd.take(xs * type_width(n)), n, xs)
        rnd_b = make_round((tx_b / n)[:, None, None], spec.channels[0].flat(), params.delta,
                           params, "m1")
        body_b = rd.take(len(msg) - rd.pos - len(sa_bits))
        run.receive_round(1, rnd_b, body_b, own=np.zeros(n, dtype=np.int64))
        if spec.j == 1:
            return run.outcome("success", None, None, {"soundness": soundness})
        t_b = _bob_estimate(run, rd.take(len(sa_bits)), params)
        # round 2, Bob: s_B then his simulated message
        sb_bits = estimation.bob_sb(run.y, spec.y_size, rand, params)
        rnd2_b = interactive_round(t_b, spec, 2, params)
        body2 = run.send_round(2, rnd2_b)
        msg2 = run.wire.send("B", sb_bits + body2, "s_B+m2")
        rd2 = Reader(msg2)
        s_b = estimation.decode_symbols(rd2.take(len(sb_bits)), spec.y_size, params.m)
        s_a_own = estimation.local_string(run.x, estimation.sample_positions(rand, params))
        run.t["A"] = estimation.estimate_from_strings(s_a_own, s_b, xs, spec.y_size)
        rnd2_a = interactive_round(run.t["A"], spec, 2, params)
        run.receive_round(2, rnd2_a, rd2.take(len(msg2) - rd2.pos))
        soundness.append(run.soundness(t_b, 2))
        _later_rounds(run, 3, params, soundness)
    except Abort as err:
        return run.outcome("abort", _tag(run, err, 2, run.t["B"], multi), run.t["B"],
                           {"soundness": soundness})
    return run.outcome("success", None, run.t["B"], {"soundness": soundness})
