"""Regenerates data/mock/*.jsonl and data/bench/cases.jsonl.

Citation ids refer to data/kb/corpus.jsonl; rebuild the corpus first if the
sources change, then update the ids below.
"""
import json
import os

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
out=[]
def fenced(obj): return "```json\n"+json.dumps(obj,indent=2)+"\n```"
def add(tid, match, obj): out.append({"template_id":tid,"match":match,"reply":fenced(obj)})

# ecdsa_verify.c
m=["bool ecdsa_verify(const curve_t *curve"]
add("summary.v1",m,{"summary":"ECDSA signature verification in C. The function computes w = s^-1 mod n, u1 and u2, the point R = u1*G + u2*Q, and compares R.x mod n with r.","algorithms":["ECDSA"],"parameters":[{"name":"curve->n","value":"group order","role":"modulus"}]})
add("compliance.v1",m,{"verdicts":[
 {"check_id":"ecdsa.rs-range","status":"violation","evidence":"r and s are used without checking 1 <= r, s <= n-1"},
 {"check_id":"ecdsa.nonce","status":"indeterminate","evidence":"verification only; no nonce is generated"},
 {"check_id":"ecdsa.pubkey","status":"indeterminate","evidence":"Q is not validated here; callers may validate it"},
 {"check_id":"ecdsa.hash-truncation","status":"violation","evidence":"the full digest is reduced modulo n instead of truncated"},
 {"check_id":"ecdsa.curve","status":"indeterminate","evidence":"the curve is passed in by the caller"}]})
add("cot.v1",m,{"steps":[
 "ECDSA verify function computes the verification with signature r and s directly.",
 "It does not check that r and s are in the range 1 to n-1 before computing w.",
 "A missing r s range check is dangerous: r = 0 with R at infinity is accepted."],
 "candidate_flaws":[{"label":"missing r s range check","confidence":"high","evidence":"no check that r and s are in range 1 to n-1"}]})
add("curve_extract.v1",m,{"curve":None})
add("detect.v1",m,{"findings":[
 {"title":"Signature components r and s are not range checked","category":"signature_verification","severity":"critical",
  "evidence":"ecdsa_verify inverts s and uses r without rejecting values outside [1, n-1]","remediation":"Return false unless 1 <= r < n and 1 <= s < n before any arithmetic.","citations":["7b809125d5404c86"]},
 {"title":"Digest reduced modulo n instead of truncated","category":"signature_verification","severity":"low",
  "evidence":"bn_mod(&e, &e, &curve->n) reduces the whole digest","remediation":"Keep only the leftmost bit-length-of-n bits of the digest."}]})

# rsa_encrypt.py
m=["def encrypt_message(key: PublicKey"]
add("summary.v1",m,{"summary":"Python RSA encryption and decryption helpers that apply pow(m, e, n) to the message integer without padding.","algorithms":["RSA"],"parameters":[{"name":"key.e","value":"caller supplied","role":"public exponent"}]})
add("compliance.v1",m,{"verdicts":[
 {"check_id":"rsa-oaep.padding","status":"violation","evidence":"pow(m, key.e, key.n) is applied to the raw message"},
 {"check_id":"rsa-oaep.hash","status":"violation","evidence":"no OAEP encoding, so no hash is used"},
 {"check_id":"rsa-oaep.modulus","status":"indeterminate","evidence":"the modulus size is not checked"},
 {"check_id":"rsa-oaep.exponent","status":"indeterminate","evidence":"the exponent is not checked"},
 {"check_id":"rsa-oaep.decrypt-errors","status":"pass","evidence":"decryption has no error branches"}]})
add("cot.v1",m,{"steps":[
 "The code computes pow(m, e, n) directly on the message, which is textbook RSA encryption without padding.",
 "Textbook RSA is deterministic and malleable, so it is not secure."],
 "candidate_flaws":[{"label":"textbook RSA encryption without padding","confidence":"high","evidence":"c = pow(m, key.e, key.n)"}]})
add("detect.v1",m,{"findings":[
 {"title":"RSA encryption without OAEP padding","category":"padding_scheme","severity":"critical",
  "evidence":"encrypt_message computes pow(m, key.e, key.n) on the unpadded message","remediation":"Use RSA-OAEP with SHA-256 from a vetted library.","citations":["8d61380b821e1f49","761e87d4ad91188d"]}]})

# session_cookie.js
m=["function sealCookie(profile)"]
add("summary.v1",m,{"summary":"Node.js session cookie sealing with AES-128 in ECB mode; the profile string email, uid and role is encrypted and base64 encoded.","algorithms":["AES-128-ECB"],"parameters":[{"name":"KEY","value":"COOKIE_KEY environment variable","role":"key"}]})
add("compliance.v1",m,{"verdicts":[
 {"check_id":"aes-gcm.mode","status":"violation","evidence":"createCipheriv(\"aes-128-ecb\", KEY, null)"},
 {"check_id":"aes-gcm.nonce","status":"indeterminate","evidence":"ECB takes no IV"},
 {"check_id":"aes-gcm.tag-length","status":"violation","evidence":"no authentication tag"},
 {"check_id":"aes-gcm.tag-verify","status":"violation","evidence":"openCookie trusts any decryptable token"},
 {"check_id":"aes-gcm.key","status":"indeterminate","evidence":"key comes from the environment"}]})
add("cot.v1",m,{"steps":[
 "The cookie is encrypted with AES ECB mode, which is insecure for encrypting data with repeated blocks.",
 "Instead the code should use AES-GCM."],
 "candidate_flaws":[{"label":"AES ECB mode","confidence":"high","evidence":"aes-128-ecb cipher for the session cookie"}]})
add("detect.v1",m,{"findings":[
 {"title":"Session cookie encrypted with AES-ECB","category":"block_cipher_mode","severity":"high",
  "evidence":"sealCookie uses createCipheriv(\"aes-128-ecb\", KEY, null); blocks can be cut and pasted to forge role=admin","remediation":"Encrypt with AES-GCM under a fresh 96-bit nonce and reject cookies whose tag fails.","citations":["6bec4eab78b95452"]}]})

# reset_token.js
m=["function makeResetToken(length"]
add("summary.v1",m,{"summary":"Node.js password reset token generator that maps crypto.randomBytes output onto a 62 character alphabet with a modulo operation.","algorithms":["uniform-random-int"],"parameters":[{"name":"ALPHABET.length","value":"62","role":"range"}]})
add("compliance.v1",m,{"verdicts":[
 {"check_id":"drbg.source","status":"pass","evidence":"crypto.randomBytes"},
 {"check_id":"drbg.uniform","status":"violation","evidence":"bytes[i] % ALPHABET.length with 62 not dividing 256"},
 {"check_id":"drbg.width","status":"pass","evidence":"one byte covers 62 symbols"}]})
add("cot.v1",m,{"steps":[
 "The random token generator uses a random byte modulo the alphabet length.",
 "62 does not divide 256, so this modulo reduction introduces bias in the generated characters."],
 "candidate_flaws":[{"label":"modulo bias","confidence":"high","evidence":"bytes[i] % ALPHABET.length"}]})
add("detect.v1",m,{"findings":[
 {"title":"Reset token characters are biased by modulo reduction","category":"randomness_bias","severity":"medium",
  "evidence":"makeResetToken maps bytes[i] % 62, so the first 8 symbols appear with probability 5/256 instead of 4/256","remediation":"Use crypto.randomInt(ALPHABET.length) or reject bytes >= 248.","citations":["f299c636377332a3"]}]})

# vault_key.go
m=["func DeriveVaultKey(password string)"]
add("summary.v1",m,{"summary":"Go key derivation for a password vault using PBKDF2 with HMAC-SHA256, a 16 byte random salt and an iteration count of 1000.","algorithms":["PBKDF2"],"parameters":[{"name":"iterations","value":"1000","role":"cost"},{"name":"saltSize","value":"16","role":"salt length"}]})
add("compliance.v1",m,{"verdicts":[
 {"check_id":"pbkdf2.iterations","status":"violation","evidence":"iterations = 1000"},
 {"check_id":"pbkdf2.salt","status":"pass","evidence":"16 bytes from crypto/rand"},
 {"check_id":"pbkdf2.prf","status":"pass","evidence":"sha256.New"},
 {"check_id":"pbkdf2.dklen","status":"pass","evidence":"keySize = 32"}]})
add("cot.v1",m,{"steps":[
 "PBKDF2 is used to derive an encryption key from a password.",
 "The iteration count of 1000 is not enough; PBKDF2 should use many more iterations."],
 "candidate_flaws":[{"label":"weak PBKDF2 iterations","confidence":"high","evidence":"iterations = 1000"}]})
add("detect.v1",m,{"findings":[
 {"title":"PBKDF2 iteration count of 1000 is far too low","category":"key_derivation","severity":"high",
  "evidence":"DeriveVaultKey calls pbkdf2.Key with iterations = 1000","remediation":"Raise the count to at least 600000 or switch to Argon2id.","citations":["e853f25e392d72b0"]}]})

# aead_box.py
m=["def seal_record(self, plaintext: bytes"]
add("summary.v1",m,{"summary":"Python AES-GCM record sealing with a 256-bit generated key and a fresh random 96-bit nonce from os.urandom per record.","algorithms":["AES-256-GCM"],"parameters":[{"name":"nonce","value":"os.urandom(12)","role":"nonce"}]})
add("compliance.v1",m,{"verdicts":[
 {"check_id":"aes-gcm.mode","status":"pass","evidence":"AESGCM"},
 {"check_id":"aes-gcm.nonce","status":"pass","evidence":"os.urandom(12) per call"},
 {"check_id":"aes-gcm.tag-length","status":"pass","evidence":"library default 128-bit tag"},
 {"check_id":"aes-gcm.tag-verify","status":"pass","evidence":"AESGCM.decrypt verifies before returning"},
 {"check_id":"aes-gcm.key","status":"pass","evidence":"AESGCM.generate_key(bit_length=256)"}]})
add("cot.v1",m,{"steps":[
 "A fresh random 96-bit nonce from os.urandom is generated for every AES-GCM encryption under one key.",
 "Associated data is passed to both encrypt and decrypt; this is safe."],
 "candidate_flaws":[]})
add("detect.v1",m,{"findings":[]})

# extra_samples/toy_curve.py
m=["def scalar_mul(k, point)"]
add("summary.v1",m,{"summary":"Python elliptic curve arithmetic over a custom short Weierstrass curve y^2 = x^3 + x + 14 mod 43 with base point (0, 10), used for a key exchange demo.","algorithms":["custom-curve"],"parameters":[{"name":"P","value":"43","role":"field prime"}]})
add("cot.v1",m,{"steps":[
 "The curve parameters are hard-coded and tiny, so discrete logarithms are easy.",
 "The group order should be checked: a curve with exactly p points is anomalous."],
 "candidate_flaws":[{"label":"weak custom curve","confidence":"high","evidence":"P = 43"}]})
add("curve_extract.v1",m,{"curve":{"p":"43","a":"1","b":"14"}})
add("detect.v1",m,{"findings":[
 {"title":"Custom curve is anomalous and tiny","category":"weak_parameters","severity":"critical",
  "evidence":"P = 43, A = 1, B = 14 gives a group of exactly 43 points","remediation":"Use a standard curve such as P-256 or X25519."}]})

scan_entries=list(out)
cases=[
 ("ecdsa-rs-range","ecdsa_verify.c","cve","c",
  "The ECDSA verifier never checks that r and s lie in [1, n-1]. With r = 0 or s = 0 the verification equation degenerates and a forged signature can be accepted for any message. Reject out-of-range components before computing s^-1.",
  "Signature components r and s are not range checked",0.92,0.85,(88,80,90)),
 ("rsa-no-padding","rsa_encrypt.py","ctf","python",
  "Messages are encrypted with textbook RSA, pow(m, e, n), without OAEP padding. Encryption is deterministic and malleable, and short messages with a small exponent can be recovered by an integer root. Use RSA-OAEP.",
  "RSA encryption without OAEP padding",0.9,0.8,(90,75,85)),
 ("cookie-ecb","session_cookie.js","ctf","javascript",
  "The session cookie is encrypted with AES-128-ECB and has no integrity protection. Identical blocks encrypt identically and ciphertext blocks can be spliced to forge role=admin. Use an AEAD mode such as AES-GCM.",
  "Session cookie encrypted with AES-ECB",0.88,0.9,(85,85,80)),
 ("token-modulo-bias","reset_token.js","synthetic","javascript",
  "Reset tokens map random bytes onto a 62-symbol alphabet with a modulo reduction. Since 62 does not divide 256, the first eight symbols are more likely. Use rejection sampling or crypto.randomInt.",
  "Reset token characters are biased by modulo reduction",0.95,1.0,(92,88,94)),
 ("pbkdf2-iterations","vault_key.go","synthetic","go",
  "The vault key is derived with PBKDF2-HMAC-SHA256 using only 1000 iterations, which makes offline password guessing cheap. Use at least 600000 iterations or a memory-hard function.",
  "PBKDF2 iteration count of 1000 is far too low",0.9,0.75,(80,70,90)),
]
with open(ROOT + "/data/bench/cases.jsonl","w") as f:
    for cid,path,src,lang,ref,title,sm,cov,cred in cases:
        f.write(json.dumps({"id":cid,"sample":{"source_path":"../samples/"+path},"reference_analysis":ref,
                            "tags":{"source":src,"language":lang}})+"\n")
        add("judge.semantic_match.v1",[title],{"score":sm})
        add("judge.coverage.v1",[title],{"score":cov})
        add("judge.credibility.v1",[title],{"relevance":cred[0],"informativeness":cred[1],"logical_soundness":cred[2]})
with open(ROOT + "/data/mock/scan_script.jsonl","w") as f:
    for e in scan_entries: f.write(json.dumps(e)+"\n")
with open(ROOT + "/data/mock/eval_script.jsonl","w") as f:
    for e in out: f.write(json.dumps(e)+"\n")
