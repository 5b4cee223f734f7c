"""Slow, independent reference implementations used only by the tests.

Nothing here imports the package's counting or correlation code.
"""

import math


def _grams(seq, k):
    return [tuple(seq[i:i + k]) for i in range(len(seq) - k + 1)]


def clipped_matches(hyp, ref, k):
    hyp_grams = _grams(hyp, k)
    ref_grams = _grams(ref, k)
    total = 0
    for gram in set(hyp_grams):
        total += min(hyp_grams.count(gram), ref_grams.count(gram))
    return total


def corpus_bleu(hyps, refs, order=4):
    """Corpus BLEU by recounting every n-gram, clipping per segment.

    Orders with no hypothesis n-grams anywhere are left out of the mean; an
    empty corpus hypothesis scores 0. No smoothing.
    """
    matches = [0] * order
    totals = [0] * order
    c = r = 0
    for hyp, ref in zip(hyps, refs):
        c += len(hyp)
        r += len(ref)
        for k in range(1, order + 1):
            matches[k - 1] += clipped_matches(hyp, ref, k)
            totals[k - 1] += len(_grams(hyp, k))
    if totals[0] == 0:
        return 0.0
    logs = []
    for m, t in zip(matches, totals):
        if t == 0:
            break
        if m == 0:
            return 0.0
        logs.append(math.log(m / t))
    bp = 1.0 if c >= r else math.exp(1 - r / c)
    return 100 * bp * math.exp(sum(logs) / len(logs))


def chrf(hyp, ref, order=6, beta=2.0):
    """Sentence chrF by enumerating every character n-gram of both strings."""
    hyp = "".join(hyp.split())
    ref = "".join(ref.split())
    ps, rs = [], []
    for k in range(1, order + 1):
        h = [hyp[i:i + k] for i in range(len(hyp) - k + 1)]
        g = [ref[i:i + k] for i in range(len(ref) - k + 1)]
        if not h and not g:
            continue
        m = sum(min(h.count(x), g.count(x)) for x in set(h))
        ps.append(m / len(h) if h else 0.0)
        rs.append(m / len(g) if g else 0.0)
    if not ps:
        return 0.0
    p = sum(ps) / len(ps)
    r = sum(rs) / len(rs)
    if p + r == 0:
        return 0.0
    return 100 * (1 + beta ** 2) * p * r / (beta ** 2 * p + r)


def pearson(x, y):
    n = len(x)
    mx = sum(x) / n
    my = sum(y) / n
    cov = sum((a - mx) * (b - my) for a, b in zip(x, y))
    vx = sum((a - mx) ** 2 for a in x)
    vy = sum((b - my) ** 2 for b in y)
    return cov / math.sqrt(vx * vy)


def kendall_tau_b(x, y):
    """Tau-b from explicit concordant/discordant/tie counts over all pairs."""
    c = d = tx = ty = 0
    n = len(x)
    for i in range(n):
        for j in range(i + 1, n):
            dx = x[i] - x[j]
            dy = y[i] - y[j]
            if dx == 0 and dy == 0:
                continue
            if dx == 0:
                tx += 1
            elif dy == 0:
                ty += 1
            elif (dx > 0) == (dy > 0):
                c += 1
            else:
                d += 1
    return (c - d) / math.sqrt((c + d + tx) * (c + d + ty))


def random_corpus(rng, n_segments, vocab_size=12, max_len=15, min_len=0):
    vocab = [f"w{i}" for i in range(vocab_size)]
    return [[vocab[rng.integers(vocab_size)] for _ in range(rng.integers(min_len, max_len + 1))]
            for _ in range(n_segments)]
