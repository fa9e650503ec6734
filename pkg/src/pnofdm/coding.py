"""Rate-1/2 convolutional code (generators 133/171 octal, constraint length 7)
with exact maximum-likelihood soft-decision Viterbi decoding.

Codewords are zero-tail terminated: six flush zeros are appended so the
encoder returns to the all-zero state, and the decoder runs a full-block
traceback from that state (which is ML for the terminated code; the effective
decision depth is the whole block).

LLR convention: ``llr = log P(bit = 0) / P(bit = 1)``, so positive values
favor bit 0.
"""

from __future__ import annotations

import numpy as np

__all__ = ["CONSTRAINT_LENGTH", "GENERATORS_OCTAL", "conv_encode", "viterbi_decode_soft"]

CONSTRAINT_LENGTH = 7
GENERATORS_OCTAL = (0o133, 0o171)

_MEM = CONSTRAINT_LENGTH - 1
_NSTATES = 1 << _MEM

# Tap vectors, most recent bit first (delay 0 .. 6).
_TAPS1 = np.array([(GENERATORS_OCTAL[0] >> (CONSTRAINT_LENGTH - 1 - i)) & 1 for i in range(CONSTRAINT_LENGTH)])
_TAPS2 = np.array([(GENERATORS_OCTAL[1] >> (CONSTRAINT_LENGTH - 1 - i)) & 1 for i in range(CONSTRAINT_LENGTH)])


def _parity(x):
    x = np.asarray(x)
    out = np.zeros_like(x)
    while np.any(x):
        out ^= x & 1
        x = x >> 1
    return out


def _build_trellis():
    s = np.arange(_NSTATES)
    u = np.array([[0], [1]])
    reg = (u << _MEM) | s  # shape (2, 64): newest bit at the top of the register
    out1 = _parity(reg & GENERATORS_OCTAL[0]).T  # (64, 2)
    out2 = _parity(reg & GENERATORS_OCTAL[1]).T
    nxt = ((u << (_MEM - 1)) | (s >> 1)).T
    # Predecessors of state sp: the input bit on any edge into sp is its MSB,
    # and the two predecessors differ in their oldest bit.
    sp = np.arange(_NSTATES)
    pred0 = (sp & (_NSTATES // 2 - 1)) << 1
    pred1 = pred0 + 1
    ubit = sp >> (_MEM - 1)
    return out1, out2, nxt, pred0, pred1, ubit


_OUT1, _OUT2, _NEXT, _PRED0, _PRED1, _UBIT = _build_trellis()


def conv_encode(bits) -> np.ndarray:
    """Encode a bit sequence at rate 1/2 with zero-tail termination.

    Returns ``2 * (len(bits) + 6)`` coded bits, the two generator outputs
    interleaved per input bit.  An empty input yields the 12 flush bits.
    """
    bits = np.asarray(bits, dtype=int).ravel()
    if bits.size and not np.all((bits == 0) | (bits == 1)):
        raise ValueError("bits must be 0/1")
    u = np.concatenate([bits, np.zeros(_MEM, dtype=int)])
    c1 = np.convolve(u, _TAPS1)[: u.size] % 2
    c2 = np.convolve(u, _TAPS2)[: u.size] % 2
    out = np.empty(2 * u.size, dtype=int)
    out[0::2] = c1
    out[1::2] = c2
    return out


def viterbi_decode_soft(llrs) -> np.ndarray:
    """ML decode soft LLRs of a zero-terminated codeword.

    ``llrs`` must contain one value per coded bit (even length).  The path
    score accumulates ``-sum(c * llr)`` over coded bits ``c``, maximized over
    the terminated trellis; ties are broken deterministically toward the
    lower-numbered predecessor, which selects the all-zero path on all-zero
    input.  Returns the information bits with the six tail bits removed.
    """
    llrs = np.asarray(llrs, dtype=float).ravel()
    if llrs.size % 2 != 0:
        raise ValueError("llr length must be even")
    n_steps = llrs.size // 2
    if n_steps < _MEM:
        raise ValueError("codeword shorter than the flush tail")

    pm = np.full(_NSTATES, -np.inf)
    pm[0] = 0.0
    choices = np.empty((n_steps, _NSTATES), dtype=bool)
    for t in range(n_steps):
        l1, l2 = llrs[2 * t], llrs[2 * t + 1]
        bscore = -(_OUT1 * l1 + _OUT2 * l2)  # (64, 2)
        cand0 = pm[_PRED0] + bscore[_PRED0, _UBIT]
        cand1 = pm[_PRED1] + bscore[_PRED1, _UBIT]
        take1 = cand1 > cand0
        choices[t] = take1
        pm = np.where(take1, cand1, cand0)

    state = 0  # terminated codeword ends in the zero state
    decoded = np.empty(n_steps, dtype=int)
    for t in range(n_steps - 1, -1, -1):
        decoded[t] = state >> (_MEM - 1)
        state = _PRED1[state] if choices[t, state] else _PRED0[state]
    return decoded[: n_steps - _MEM]
