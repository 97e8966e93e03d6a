#include "prompts.hpp"

namespace cryptaudit::prompts {

namespace {

const std::string kSummaryInstruction = R"(You are a cryptography auditor reading unfamiliar source code.
Produce a short semantic summary of the target code that another analyst can use to look up related knowledge.
Work through these steps before writing the summary:
1. Identify every cryptographic primitive, mode, padding scheme, key-derivation function, random number source and protocol step in the code.
2. Record parameter sizes and constants: key lengths, modulus and exponent sizes, curve coefficients, iteration counts, nonce/IV lengths, tag lengths.
3. Describe the algebraic structure being used (integers mod n, prime field, elliptic curve group, byte-oriented block cipher, hash chain).
4. Describe the data flow: where keys, nonces and random values come from and where ciphertexts, signatures or tokens go.
Name algorithms with these canonical identifiers when they apply: rsa-oaep, rsa-pkcs1v15, rsa-textbook, ecdsa, ecdh, ec-custom, aes-gcm, aes-cbc, aes-ecb, aes-ctr, pbkdf2-hmac-sha256, hmac-sha256, ffdh, drbg-uniform-int, chacha20-poly1305, sha256, md5. Otherwise use a short lowercase name.)";

const std::string kSummaryExample = R"(Code: a Go function that derives a key with pbkdf2.Key(password, salt, 1000, 16, sha1.New) and encrypts with cipher.NewGCM.
Walkthrough: the KDF is PBKDF2 with HMAC-SHA1, 1000 iterations and a 16-byte output; the cipher is AES-128 in GCM mode; the salt is a package-level constant.
Output:
```json
{"summary": "PBKDF2-HMAC-SHA1 (1000 iterations, constant salt) derives a 128-bit AES key used with AES-GCM.",
 "algorithms": ["pbkdf2-hmac-sha1", "aes-gcm"],
 "parameters": [{"name": "iterations", "value": "1000", "role": "kdf work factor"},
                {"name": "salt", "value": "constant", "role": "kdf salt"}]}
```)";

const std::string kSummaryNotice = R"(Reply with exactly one fenced ```json block containing an object with keys:
"summary" (string, at most five sentences, focused on cryptographic logic, parameter sizes and algebraic structure),
"algorithms" (array of identifiers, empty when the code has no cryptographic content),
"parameters" (array of {"name", "value", "role"} objects; use "value" for a literal or a size such as "2048 bits").
Do not judge security here; only describe.)";

const std::string kComplianceInstruction = R"(You are checking an implementation against a reference checklist distilled from the algorithm's standard.
For each checklist item:
1. Locate the code that generates or validates the parameter, or performs the step, named in the requirement.
2. Decide "pass" when the code satisfies the requirement, "violation" when it contradicts it, and "indeterminate" when the relevant logic is absent from the excerpt or depends on callers you cannot see.
3. Quote or cite the lines that justify the decision.
Simulate a manual audit: follow key generation, encryption/signing and decryption/verification paths separately.)";

const std::string kComplianceExample = R"(Checklist item: [pbkdf2.iterations] (high) The iteration count must be at least 600000 for PBKDF2-HMAC-SHA256.
Code: `hashlib.pbkdf2_hmac("sha256", pw, salt, 10000)`
Verdict: {"check_id": "pbkdf2.iterations", "status": "violation", "evidence": "line 4 uses 10000 iterations"})";

const std::string kComplianceNotice = R"(Reply with exactly one fenced ```json block containing {"verdicts": [...]}.
Each verdict is {"check_id": <id from the checklist>, "status": "pass" | "violation" | "indeterminate", "evidence": <string>}.
Answer every checklist item exactly once and use no other check ids.)";

const std::string kCotInstruction = R"(You are a cryptanalyst reviewing code for logic flaws, not style issues.
Reason step by step:
1. State the security goals the code is meant to provide: confidentiality, integrity, authentication.
2. Break each goal into concrete checks:
   - input validation: are signature components, public keys, points, lengths and padding bytes range-checked before use?
   - primitive misuse: deterministic modes such as ECB, textbook RSA, unauthenticated encryption, reused nonces or IVs, hashes used as MACs;
   - parameter choice: key sizes, iteration counts, prime and curve parameters, exponent choices;
   - randomness: non-cryptographic generators, modulo bias, predictable seeds;
   - error handling: failures that are ignored, oracles created by distinct error paths, early returns that skip verification.
3. For each check, say what the code does and whether it meets the goal.
4. List candidate flaws with a confidence level and the line numbers that support them.)";

const std::string kCotNotice = R"(Reply with exactly one fenced ```json block containing:
{"steps": [<one string per reasoning step, in order>],
 "candidate_flaws": [{"label": <short flaw name>, "confidence": "low" | "medium" | "high", "evidence": <lines and explanation>}]}
"steps" must not be empty. Use an empty "candidate_flaws" array when no flaw is found.
Do not invent code that is not shown.)";

const std::vector<std::string> kFewShot = {
    R"(Example A (signature verification):
```c
int verify(const uint8_t *hash, const bignum *r, const bignum *s, const point *Q) {
    bignum w = inverse(s, n);
    bignum u1 = mulmod(hash, w, n), u2 = mulmod(r, w, n);
    point X = add(mul(G, u1), mul(Q, u2));
    return equal(X.x mod n, r);
}
```
Steps: the goal is authentication; verification must reject malformed signatures; r and s are used without checking 1 <= r, s <= n-1; with r = s = 0 the inverse is undefined and several libraries return 0, making X the point at infinity.
Candidate flaw: "missing r/s range check" (high), lines 2-5.)",
    R"(Example B (random token):
```js
const chars = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789-_";
for (const b of crypto.randomBytes(len)) out += chars[b % 62];
```
Steps: the goal is unpredictability; the source is a CSPRNG, but 256 is not a multiple of 62, so indices 0..7 occur with probability 5/256 and the rest 4/256.
Candidate flaw: "modulo bias in random string generation" (medium), line 2.)",
};

const std::string kCurveInstruction = R"(Extract elliptic-curve domain parameters from the target code, if any.
Look for a prime modulus p and coefficients a and b of a short Weierstrass curve y^2 = x^3 + a*x + b, and a stated group order if present.
Copy literals exactly as written (decimal or 0x hex). Convert expressions you can evaluate exactly (for example p = 2**127 - 1) into integers.
Do not substitute a named standard curve unless the code names it, and then give its standard parameters.)";

const std::string kCurveExample = R"(Code: `P = 0xfffffffffffffffffffffffffffffffeffffffffffffffff; A = -3; B = 0x64210519e59c80e70fa7e9ab72243049feb8deecc146b9b1`
Output:
```json
{"curve": {"p": "0xfffffffffffffffffffffffffffffffeffffffffffffffff", "a": "-3", "b": "0x64210519e59c80e70fa7e9ab72243049feb8deecc146b9b1", "order": null}}
```)";

const std::string kCurveNotice = R"(Reply with exactly one fenced ```json block.
When the code defines no elliptic curve reply {"curve": null}.
Otherwise reply {"curve": {"p": <string>, "a": <string>, "b": <string>, "order": <string or null>}}.)";

const std::string kDetectInstruction = R"(You are writing the final audit of the target code.
You are given the code, a semantic summary, standards-compliance findings (when a reference checklist applied), a step-by-step security analysis, optional curve analysis, and numbered knowledge entries retrieved from a cryptography knowledge base.
1. Re-check every candidate flaw and every compliance violation against the code itself; discard those the code does not support.
2. Use the knowledge entries to confirm the flaw class, its impact and the standard fix. Cite an entry only when you actually used it, by its id.
3. Look for flaws the earlier analysis missed, in particular in input validation, primitive choice, parameters, randomness and error handling.
4. Report each confirmed flaw once, with severity: critical (forgery, key recovery or plaintext recovery with little effort), high, medium, low, info.)";

const std::string kDetectNotice = R"(Reply with exactly one fenced ```json block:
{"findings": [{"title": <string>, "category": <one of signature_verification, padding_scheme, block_cipher_mode, randomness_bias, key_derivation, weak_parameters, nonce_misuse, side_channel, key_management, input_validation, other>,
               "severity": "critical" | "high" | "medium" | "low" | "info",
               "evidence": <lines and reasoning>, "remediation": <concrete fix>,
               "citations": [<knowledge entry ids>]}]}
Use an empty "findings" array when the code has no cryptographic logic flaw.)";

const std::string kExtractInstruction = R"(Split the writeup into self-contained knowledge units, one per distinct technique, vulnerability or attack step.
Each unit must make sense without the rest of the writeup: name the primitive, the flaw and the attack or fix.)";

const std::string kExtractExample = R"(Writeup: a CTF challenge where RSA used e = 3 without padding and a short message, solved by taking the integer cube root.
Unit: {"title": "Small public exponent without padding", "content": "With e = 3 and no padding, m^3 < n for short messages, so c = m^3 over the integers and m is recovered by an integer cube root."})";

const std::string kExtractNotice = R"(Reply with exactly one fenced ```json block containing {"units": [{"title": <string>, "content": <string>}]}.)";

const std::string kJudgeSemantic = R"(You are judging whether a generated vulnerability analysis agrees with a reference analysis written by an expert.
Score semantic alignment from 0 to 1: 1 when the generated analysis identifies the same flaw(s) with compatible reasoning, 0 when it identifies none of them or contradicts the reference. Ignore wording and formatting.)";

const std::string kJudgeCoverage = R"(You are judging how much of a reference vulnerability analysis is covered by a generated analysis.
List the distinct relevant points in the reference (flaw, location, root cause, impact, fix). Score the fraction of those points the generated analysis addresses correctly, from 0 to 1. Content in the generated analysis that is irrelevant or wrong does not add coverage.)";

const std::string kJudgeCredibility = R"(You are rating the credibility of a generated vulnerability analysis, using the reference analysis as ground truth.
Give three integer sub-scores from 0 to 100:
- relevance: does it address the cryptographic flaw actually present?
- informativeness: does it explain location, root cause, impact and fix?
- logical_soundness: is the reasoning correct and free of contradictions?)";

const std::string kJudgeExample = R"(Reference: "ECB mode leaks equal plaintext blocks."
Generated: "The code uses AES-ECB, so identical 16-byte blocks encrypt identically; use AES-GCM."
This agrees with the reference and covers the flaw and a fix.)";

const std::string kJudgeScoreNotice = R"(Reply with exactly one fenced ```json block containing {"score": <number between 0 and 1>}.)";

const std::string kJudgeCredibilityNotice = R"(Reply with exactly one fenced ```json block containing {"relevance": <0-100>, "informativeness": <0-100>, "logical_soundness": <0-100>}.)";

}  // namespace

const std::string& summary_instruction() { return kSummaryInstruction; }
const std::string& summary_example() { return kSummaryExample; }
const std::string& summary_notice() { return kSummaryNotice; }

const std::string& compliance_instruction() { return kComplianceInstruction; }
const std::string& compliance_example() { return kComplianceExample; }
const std::string& compliance_notice() { return kComplianceNotice; }

const std::string& cot_instruction() { return kCotInstruction; }
const std::string& cot_notice() { return kCotNotice; }
const std::vector<std::string>& default_few_shot_examples() { return kFewShot; }

const std::string& curve_instruction() { return kCurveInstruction; }
const std::string& curve_example() { return kCurveExample; }
const std::string& curve_notice() { return kCurveNotice; }

const std::string& detect_instruction() { return kDetectInstruction; }
const std::string& detect_notice() { return kDetectNotice; }

const std::string& extract_units_instruction() { return kExtractInstruction; }
const std::string& extract_units_example() { return kExtractExample; }
const std::string& extract_units_notice() { return kExtractNotice; }

const std::string& judge_semantic_instruction() { return kJudgeSemantic; }
const std::string& judge_coverage_instruction() { return kJudgeCoverage; }
const std::string& judge_credibility_instruction() { return kJudgeCredibility; }
const std::string& judge_example() { return kJudgeExample; }
const std::string& judge_score_notice() { return kJudgeScoreNotice; }
const std::string& judge_credibility_notice() { return kJudgeCredibilityNotice; }

std::string retry_note(const std::string& error) {
  return "\n## Correction\nYour previous reply could not be used (" + error +
         "). Reply again following the Notice exactly, with a single fenced ```json block.\n";
}

}  // namespace cryptaudit::prompts
