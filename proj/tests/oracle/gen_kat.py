#!/usr/bin/env python3
"""Known-answer vectors for the in-house PQ primitives.

Independent implementations: pyca/cryptography (ML-KEM-768, ML-DSA-65 keys),
dilithium-py (deterministic ML-DSA-65 signing) and the slh-dsa package
(SLH-DSA-SHAKE-192s). Writes tests/data/kat_vectors.json.
"""
import hashlib
import json
import pathlib

from cryptography.hazmat.primitives.asymmetric import mldsa, mlkem
from dilithium_py.ml_dsa import ML_DSA_65
import slhdsa.lowlevel.slhdsa as S
from slhdsa.lowlevel.parameters import shake_192s as P

MSG = b"hello pqchain"


def sha(b):
    return hashlib.sha256(b).hexdigest()


def mlkem_vectors():
    seed = bytes(range(64))
    k = mlkem.MLKEM768PrivateKey.from_seed_bytes(seed)
    ek = k.public_key().public_bytes_raw()
    ss, ct = k.public_key().encapsulate()
    assert k.decapsulate(ct) == ss
    return {"seed": seed.hex(), "ek_sha256": sha(ek), "ciphertext": ct.hex(), "shared_secret": ss.hex()}


def mldsa_vectors():
    xi = bytes(range(32))
    k = mldsa.MLDSA65PrivateKey.from_seed_bytes(xi)
    pk = k.public_key().public_bytes_raw()
    hedged = k.sign(MSG)
    pk2, sk2 = ML_DSA_65.key_derive(xi)
    assert pk2 == pk
    det = ML_DSA_65.sign(sk2, MSG, deterministic=True)
    k.public_key().verify(det, MSG)
    return {
        "xi": xi.hex(),
        "pk_sha256": sha(pk),
        "sk_sha256": sha(sk2),
        "message": MSG.hex(),
        "hedged_signature": hedged.hex(),
        "deterministic_signature_sha256": sha(det),
    }


def slhdsa_vectors():
    seed = bytes(range(72))
    sk_seed, sk_prf, pk_seed = seed[:24], seed[24:48], seed[48:]
    root = S.XMSS(P).node(sk_seed, 0, P.h_m, pk_seed, S.Address(P.d - 1, 0))
    ctx = b""
    m = b"\x00" + bytes([len(ctx)]) + ctx + MSG
    sig = S.sign(m, (sk_seed, sk_prf, pk_seed, root), P, randomize=False)
    return {
        "seed": seed.hex(),
        "pk_root": root.hex(),
        "message": MSG.hex(),
        "signature_len": len(sig),
        "deterministic_signature_sha256": sha(sig),
    }


def main():
    out = pathlib.Path(__file__).resolve().parents[1] / "data" / "kat_vectors.json"
    data = {"mlkem768": mlkem_vectors(), "mldsa65": mldsa_vectors(), "slhdsa_shake_192s": slhdsa_vectors()}
    out.write_text(json.dumps(data, indent=2) + "\n")
    print("wrote", out)


if __name__ == "__main__":
    main()
