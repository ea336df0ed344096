"""Independent brute-force re-implementations used as metric oracles.

Everything here is written from the metric definitions alone, in the most
literal way possible (explicit loops, full DP tables, list scans), and
deliberately shares no code with the package under test.
"""

from __future__ import annotations

import math
import re


def naive_tokens(text: str) -> list[str]:
    out = []
    current = ""
    for ch in text.lower():
        if ch.isalnum() and ch != "_":
            current += ch
        else:
            if current:
                out.append(current)
            current = ""
    if current:
        out.append(current)
    return out


def naive_ngrams(tokens: list[str], n: int) -> list[tuple[str, ...]]:
    grams = []
    for i in range(len(tokens)):
        if i + n <= len(tokens):
            grams.append(tuple(tokens[i:i + n]))
    return grams


def naive_distinct(tokens: list[str], n: int) -> float:
    grams = naive_ngrams(tokens, n)
    if len(grams) == 0:
        return 0.0
    unique = []
    for gram in grams:
        if gram not in unique:
            unique.append(gram)
    return 100.0 * len(unique) / len(grams)


def naive_bleu(hyp: list[str], refs: list[list[str]], n: int, epsilon: float = 1e-9) -> float:
    if len(hyp) == 0:
        return 0.0
    product = 1.0
    for k in range(1, n + 1):
        hyp_grams = naive_ngrams(hyp, k)
        if len(hyp_grams) == 0:
            product *= epsilon
            continue
        matches = 0
        for gram in set(hyp_grams):
            hyp_count = hyp_grams.count(gram)
            best_ref_count = 0
            for ref in refs:
                ref_count = naive_ngrams(ref, k).count(gram)
                if ref_count > best_ref_count:
                    best_ref_count = ref_count
            matches += min(hyp_count, best_ref_count)
        precision = matches / len(hyp_grams)
        if precision < epsilon:
            precision = epsilon
        product *= precision
    geometric_mean = product ** (1.0 / n)

    c = len(hyp)
    best_r = None
    for ref in refs:
        r = len(ref)
        if best_r is None:
            best_r = r
        elif abs(r - c) < abs(best_r - c) or (abs(r - c) == abs(best_r - c) and r < best_r):
            best_r = r
    bp = min(1.0, math.exp(1.0 - best_r / c))
    return geometric_mean * bp


def naive_self_bleu(token_lists: list[list[str]], n: int, epsilon: float = 1e-9) -> float:
    total = 0.0
    for i in range(len(token_lists)):
        refs = [token_lists[j] for j in range(len(token_lists)) if j != i]
        total += naive_bleu(token_lists[i], refs, n, epsilon)
    return total / len(token_lists)


def naive_rouge1_f1(gen: list[str], ref: list[str]) -> float:
    if len(gen) == 0 or len(ref) == 0:
        return 0.0
    matches = 0
    for token in set(gen):
        matches += min(gen.count(token), ref.count(token))
    p = matches / len(gen)
    r = matches / len(ref)
    if p + r == 0:
        return 0.0
    return 2 * p * r / (p + r)


def naive_lcs(a: list[str], b: list[str]) -> int:
    # Full (len(a)+1) x (len(b)+1) table.
    table = [[0] * (len(b) + 1) for _ in range(len(a) + 1)]
    for i in range(1, len(a) + 1):
        for j in range(1, len(b) + 1):
            if a[i - 1] == b[j - 1]:
                table[i][j] = table[i - 1][j - 1] + 1
            else:
                table[i][j] = max(table[i - 1][j], table[i][j - 1])
    return table[len(a)][len(b)]


def naive_rougeL_f1(gen: list[str], ref: list[str]) -> float:
    if len(gen) == 0 or len(ref) == 0:
        return 0.0
    lcs = naive_lcs(gen, ref)
    p = lcs / len(gen)
    r = lcs / len(ref)
    if p + r == 0:
        return 0.0
    return 2 * p * r / (p + r)


def naive_propositions(text: str, stop_words) -> set:
    props = set()
    for sentence in re.split(r"[.!?]+", text):
        content = [t for t in naive_tokens(sentence) if t not in stop_words]
        for word in content:
            props.add((word,))
        for i in range(len(content) - 1):
            props.add((content[i], content[i + 1]))
    return props


def naive_spice(gen_text: str, ref_text: str, stop_words) -> float:
    gen_props = naive_propositions(gen_text, stop_words)
    ref_props = naive_propositions(ref_text, stop_words)
    if len(gen_props) == 0 or len(ref_props) == 0:
        return 0.0
    overlap = 0
    for prop in gen_props:
        if prop in ref_props:
            overlap += 1
    p = overlap / len(gen_props)
    r = overlap / len(ref_props)
    if p + r == 0:
        return 0.0
    return 100.0 * 2 * p * r / (p + r)


def naive_cosine(a: list[float], b: list[float]) -> float:
    dot = sum(x * y for x, y in zip(a, b))
    norm_a = math.sqrt(sum(x * x for x in a))
    norm_b = math.sqrt(sum(y * y for y in b))
    return dot / (norm_a * norm_b)


def naive_top_k(paper_vec, candidates, k):
    """candidates: list of (vector, published_date, source_id, payload)."""
    scored = []
    for vector, published, source_id, payload in candidates:
        scored.append((naive_cosine(paper_vec, vector), published, source_id, payload))
    scored.sort(key=lambda item: (-item[0], item[1], item[2]))
    return scored[:k]
