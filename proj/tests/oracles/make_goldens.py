"""Regenerates the frozen reference files in tests/data.

MFCC reference: librosa STFT/mel + scipy DCT.
Statistics reference: scipy.stats and scikit-posthocs.
"""
import json
import pathlib

import librosa
import numpy as np
import scikit_posthocs as sp
import scipy.fft
import scipy.io.wavfile
import scipy.stats

DATA = pathlib.Path(__file__).resolve().parent.parent / "data"


def mfcc_reference(y, sr=16000, n_fft=400, hop=160, n_mels=40, n_mfcc=13):
    win = scipy.signal.get_window("hann", n_fft, fftbins=True)
    spec = librosa.stft(y.astype(np.float64), n_fft=n_fft, hop_length=hop, win_length=n_fft,
                        window=win, center=False)
    power = np.abs(spec) ** 2
    fb = librosa.filters.mel(sr=sr, n_fft=n_fft, n_mels=n_mels, fmin=0.0, fmax=sr / 2,
                             htk=True, norm=None, dtype=np.float64)
    mel = fb @ power
    logmel = np.log(np.maximum(mel, 1e-10))
    c = scipy.fft.dct(logmel, type=2, axis=0, norm="ortho")[:n_mfcc]
    return c.T  # frames x coefficients


def mfcc_goldens():
    rng = np.random.default_rng(7)
    sr = 16000
    noise = (rng.uniform(-0.5, 0.5, sr)).astype(np.float32)
    scipy.io.wavfile.write(DATA / "noise_f32.wav", sr, noise)

    t = np.arange(sr) / sr
    chirp = 0.4 * np.sin(2 * np.pi * (200 * t + 1800 * t * t)) + 0.05 * rng.standard_normal(sr)
    pcm = np.clip(np.round(chirp * 32767), -32768, 32767).astype(np.int16)
    scipy.io.wavfile.write(DATA / "chirp_pcm16.wav", sr, pcm)

    out = {}
    for name, samples in (("noise_f32.wav", noise.astype(np.float64)),
                          ("chirp_pcm16.wav", pcm.astype(np.float64) / 32768.0)):
        m = mfcc_reference(samples)
        out[name] = {"frames": m.tolist(), "mean": m.mean(axis=0).tolist()}
    (DATA / "mfcc_golden.json").write_text(json.dumps(out))


def dunn_z(groups):
    allv = np.concatenate(groups)
    n = len(allv)
    ranks = scipy.stats.rankdata(allv)
    _, counts = np.unique(allv, return_counts=True)
    tie = np.sum(counts ** 3 - counts) / (12.0 * (n - 1))
    means, sizes, pos = [], [], 0
    for g in groups:
        means.append(ranks[pos:pos + len(g)].mean())
        sizes.append(len(g))
        pos += len(g)
    k = len(groups)
    z = np.zeros((k, k))
    for i in range(k):
        for j in range(k):
            if i != j:
                se = np.sqrt((n * (n + 1) / 12.0 - tie) * (1.0 / sizes[i] + 1.0 / sizes[j]))
                z[i, j] = (means[i] - means[j]) / se
    return z


def stats_goldens():
    rng = np.random.default_rng(2024)
    cases = []
    while len(cases) < 50:
        k = int(rng.integers(2, 7))
        groups = []
        for _ in range(k):
            n = int(rng.integers(5, 51))
            kind = rng.integers(0, 3)
            if kind == 0:
                g = rng.normal(rng.uniform(-1, 1), rng.uniform(0.5, 2.0), n)
            elif kind == 1:
                g = np.round(rng.normal(rng.uniform(-1, 1), 1.0, n), 1)  # ties
            else:
                g = rng.exponential(rng.uniform(0.5, 2.0), n)
            groups.append(np.round(g, 6))
        allv = np.concatenate(groups)
        if np.ptp(allv) == 0 or any(np.ptp(g) == 0 for g in groups):
            continue
        sw = [scipy.stats.shapiro(g) for g in groups]
        lev = scipy.stats.levene(*groups, center="median")
        kw = scipy.stats.kruskal(*groups)
        adj = sp.posthoc_dunn([list(g) for g in groups], p_adjust="bonferroni").to_numpy()
        raw = sp.posthoc_dunn([list(g) for g in groups]).to_numpy()
        cases.append({
            "groups": [g.tolist() for g in groups],
            "shapiro_w": [float(s.statistic) for s in sw],
            "shapiro_p": [float(s.pvalue) for s in sw],
            "levene_w": float(lev.statistic),
            "levene_p": float(lev.pvalue),
            "kruskal_h": float(kw.statistic),
            "kruskal_p": float(kw.pvalue),
            "dunn_z": dunn_z(groups).tolist(),
            "dunn_raw_p": raw.tolist(),
            "dunn_adjusted_p": adj.tolist(),
        })
    (DATA / "stats_golden.json").write_text(json.dumps({"cases": cases}))


if __name__ == "__main__":
    import scipy.signal  # noqa: F401  (get_window)
    mfcc_goldens()
    stats_goldens()
