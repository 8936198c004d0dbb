"""Brute-force reference implementations used to cross-check the metrics.

These are written directly from the set-arithmetic definitions with plain
dicts and explicit loops, sharing no code with the package, so they stay
independent of the implementations they verify.
"""

import math
import re


def ngram_list(tokens, order):
    return [tuple(tokens[i : i + order]) for i in range(len(tokens) - order + 1)]


def to_counts(grams):
    counts = {}
    for g in grams:
        counts[g] = counts.get(g, 0) + 1
    return counts


def counts_min(a, b):
    out = {}
    for g in a:
        if g in b:
            m = a[g] if a[g] < b[g] else b[g]
            if m > 0:
                out[g] = m
    return out


def counts_sub(a, b):
    out = {}
    for g in a:
        d = a[g] - b.get(g, 0)
        if d > 0:
            out[g] = d
    return out


def oracle_sari(inputs, outputs, references, vacuous=1.0):
    """Corpus-level SARI by direct accumulation of the operation counts."""
    f_scores = {"keep": 0.0, "del": 0.0, "add": 0.0}
    for order in (1, 2, 3, 4):
        acc = {
            op: {"good": 0.0, "cand": 0.0, "target": 0.0}
            for op in ("keep", "del", "add")
        }
        for src, out, refs in zip(inputs, outputs, references):
            s = to_counts(ngram_list(list(src), order))
            o = to_counts(ngram_list(list(out), order))
            m = len(refs)
            r_avg = {}
            for ref in refs:
                for g, c in to_counts(ngram_list(list(ref), order)).items():
                    r_avg[g] = r_avg.get(g, 0.0) + c / m

            cases = {
                "keep": (counts_min(s, o), counts_min(s, r_avg)),
                "del": (counts_sub(s, o), counts_sub(s, r_avg)),
                "add": (counts_sub(o, s), counts_sub(r_avg, s)),
            }
            for op, (cand, target) in cases.items():
                acc[op]["good"] += sum(counts_min(cand, target).values())
                acc[op]["cand"] += sum(cand.values())
                acc[op]["target"] += sum(target.values())
        for op in ("keep", "del", "add"):
            good, cand, target = acc[op]["good"], acc[op]["cand"], acc[op]["target"]
            if cand == 0.0 and target == 0.0:
                f1 = vacuous
            else:
                p = good / cand if cand > 0 else 0.0
                r = good / target if target > 0 else 0.0
                f1 = 2 * p * r / (p + r) if p + r > 0 else 0.0
            f_scores[op] += f1
    f_keep = 100.0 * f_scores["keep"] / 4
    f_del = 100.0 * f_scores["del"] / 4
    f_add = 100.0 * f_scores["add"] / 4
    return {
        "sari": (f_keep + f_del + f_add) / 3.0,
        "f_keep": f_keep,
        "f_del": f_del,
        "f_add": f_add,
    }


def oracle_bleu(outputs, references):
    """Corpus BLEU with clipped precisions and a brevity penalty, no smoothing."""
    matched = [0, 0, 0, 0]
    total = [0, 0, 0, 0]
    out_len = 0
    ref_len = 0
    for out, refs in zip(outputs, references):
        out = list(out)
        out_len += len(out)
        best = None
        for ref in refs:
            key = (abs(len(ref) - len(out)), len(ref))
            if best is None or key < best:
                best = key
        ref_len += best[1]
        for order in (1, 2, 3, 4):
            o = to_counts(ngram_list(out, order))
            clip = {}
            for ref in refs:
                for g, c in to_counts(ngram_list(list(ref), order)).items():
                    if clip.get(g, 0) < c:
                        clip[g] = c
            for g, c in o.items():
                total[order - 1] += c
                matched[order - 1] += min(c, clip.get(g, 0))
    logs = []
    for order in (1, 2, 3, 4):
        if total[order - 1] == 0:
            ref_has = any(
                len(ref) >= order for refs in references for ref in refs
            )
            if ref_has:
                return 0.0
            continue
        if matched[order - 1] == 0:
            return 0.0
        logs.append(math.log(matched[order - 1] / total[order - 1]))
    if out_len == 0:
        return 0.0
    bp = 1.0 if out_len >= ref_len else math.exp(1.0 - ref_len / out_len)
    if not logs:
        return 100.0 * bp
    return 100.0 * bp * math.exp(sum(logs) / len(logs))


_VOWEL_RUN = re.compile(r"[aeiouy]+")


def oracle_syllables(word):
    """Regex-based version of the vowel-group heuristic."""
    w = word.lower()
    if not re.search(r"[a-z]", w):
        return 1
    groups = len(_VOWEL_RUN.findall(w))
    if w.endswith("e") and not re.search(r"[^aeiouy]le$", w):
        groups -= 1
    return max(groups, 1)


def oracle_fkgl(sentences):
    words = 0
    syllables = 0
    for sentence in sentences:
        for token in sentence:
            if re.search(r"[0-9a-zA-Z]", token):
                words += 1
                syllables += oracle_syllables(token)
    return 0.39 * (words / len(sentences)) + 11.8 * (syllables / words) - 15.59
