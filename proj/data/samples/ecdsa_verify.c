#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

#include "bignum.h"
#include "curve.h"

/* Verifies an ECDSA signature (r, s) over digest with public key Q. */
bool ecdsa_verify(const curve_t *curve, const point_t *Q, const uint8_t *digest,
                  size_t digest_len, const bignum_t *r, const bignum_t *s) {
  bignum_t e, w, u1, u2;
  point_t R;

  bn_from_bytes(&e, digest, digest_len);
  bn_mod(&e, &e, &curve->n);

  bn_mod_inverse(&w, s, &curve->n);
  bn_mod_mul(&u1, &e, &w, &curve->n);
  bn_mod_mul(&u2, r, &w, &curve->n);

  point_double_mul(&R, curve, &u1, &curve->G, &u2, Q);
  if (point_is_infinity(&R)) {
    return false;
  }
  bn_mod(&R.x, &R.x, &curve->n);
  return bn_cmp(&R.x, r) == 0;
}
