"""
Larger alphabets per level
==========================

With q-ary digits each level becomes a q-ary additive channel.  The total
rate creeps up with q but the gain is small once q reaches 8 or so.
"""

from expansion_coding.aen import ChannelSpec, capacity, compliant_range, rate_qary_decoding_carries

for db in (10, 20, 30):
    spec = ChannelSpec.from_snr_db(db)
    line = [f"{db:3d} dB  cap {capacity(spec):.4f}"]
    for q in (2, 3, 4, 8, 16):
        rep = rate_qary_decoding_carries(spec, compliant_range(spec, 0.01, q), q)
        line.append(f"q={q}: {rep.total:.4f}")
    print("  ".join(line))
