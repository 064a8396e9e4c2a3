"""Serialization of sweep results and the quantization-error table."""
import io
import json
import math

import numpy as np

from . import rfpn
from .harness import derive_seed

__all__ = [
    "CSV_HEADER",
    "QUANT_HEADER",
    "results_csv",
    "results_json",
    "quantization_rows",
    "quantization_csv",
]

CSV_HEADER = "method,snr_db,mean_rate_bps_hz,std_rate,trials,failed_trials"
QUANT_HEADER = "nt,ntrx,frobenius_error,p_rows,p_cols,row_nonzeros"


def _num(x):
    # repr is locale-independent and round-trips float64 exactly.
    x = float(x)
    return "nan" if math.isnan(x) else repr(x)


def _json_num(x):
    x = float(x)
    return None if math.isnan(x) else x


def results_csv(curves):
    """CSV text, one row per (method, SNR) in curve order; ``trials`` counts successes."""
    buf = io.StringIO()
    buf.write(CSV_HEADER + "\n")
    for c in curves:
        for j, snr in enumerate(c.snr_db):
            buf.write(",".join([
                c.method, _num(snr), _num(c.mean_rate[j]), _num(c.std_rate[j]),
                str(int(c.trial_count[j])), str(int(c.failed_trials[j])),
            ]) + "\n")
    return buf.getvalue()


def results_json(curves, experiment_dict):
    """Config echo (reloadable as an experiment file) plus a ``results`` block."""
    doc = dict(experiment_dict)
    doc["results"] = [
        {
            "method": c.method,
            "flagged": c.flagged,
            "snr_db": [float(x) for x in c.snr_db],
            "mean_rate_bps_hz": [_json_num(x) for x in c.mean_rate],
            "std_rate": [_json_num(x) for x in c.std_rate],
            "trials": [int(x) for x in c.trial_count],
            "failed_trials": [int(x) for x in c.failed_trials],
        }
        for c in curves
    ]
    return json.dumps(doc, indent=2, allow_nan=False) + "\n"


def quantization_rows(options, losses=rfpn.LOSSLESS):
    """One row per configured ``(nt, ntrx)`` pair.

    The target for pair ``k`` has modulus ``1/sqrt(nt)`` everywhere and
    uniform random phases drawn from ``derive_seed(options.seed, k)``.
    ``row_nonzeros`` is the largest row weight of the vectorized operator.
    """
    rows = []
    for k, (nt, ntrx) in enumerate(options.pairs):
        rng = np.random.default_rng(derive_seed(options.seed, k))
        # Same amplitude expression as the divider, so a single chain matches exactly.
        target = np.exp(1j * rng.uniform(-np.pi, np.pi, size=(nt, ntrx))) * np.sqrt(1.0 / nt)
        phases = rfpn.fit_phases_to_target(target, rfpn.FULLY_CONNECTED, options.phase_bits)
        net = rfpn.assemble_network(rfpn.FULLY_CONNECTED, phases, nt, ntrx, losses)
        system = rfpn.build_quantization_operator(nt, ntrx, losses)
        p_rows, p_cols = system.p_operator.shape
        rows.append({
            "nt": nt,
            "ntrx": ntrx,
            "frobenius_error": rfpn.quantization_error(target, net),
            "p_rows": p_rows,
            "p_cols": p_cols,
            "row_nonzeros": int(system.row_nonzeros().max()),
        })
    return rows


def quantization_csv(rows):
    lines = [QUANT_HEADER]
    for r in rows:
        lines.append(",".join([
            str(r["nt"]), str(r["ntrx"]), _num(r["frobenius_error"]),
            str(r["p_rows"]), str(r["p_cols"]), str(r["row_nonzeros"]),
        ]))
    return "\n".join(lines) + "\n"
