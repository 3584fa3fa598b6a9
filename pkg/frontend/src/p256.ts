/**
 * Minimal P-256 arithmetic over bigints.
 *
 * WebCrypto cannot derive a public key from a raw scalar or expose raw
 * point math, both of which the protocol needs (compressed encodings,
 * ECDH against arbitrary ephemerals), so the client carries its own
 * group layer.  Not hardened against timing side channels; the secret
 * key lives in this browser session anyway and is published at release
 * time by design.
 */

export const P = 0xffffffff00000001000000000000000000000000ffffffffffffffffffffffffn;
export const ORDER = 0xffffffff00000000ffffffffffffffffbce6faada7179e84f3b9cac2fc632551n;
const A = P - 3n;
const B = 0x5ac635d8aa3a93e7b3ebbd55769886bc651d06b0cc53b0f63bce3c3e27d2604bn;
const GX = 0x6b17d1f2e12c4247f8bce6e563a440f277037d812deb33a0f4a13945d898c296n;
const GY = 0x4fe342e2fe1a7f9b8ee7eb4a7c0f9e162bce33576b315ececbb6406837bf51f5n;

export function mod(a: bigint, m: bigint): bigint {
  const r = a % m;
  return r < 0n ? r + m : r;
}

export function modPow(base: bigint, exp: bigint, m: bigint): bigint {
  let result = 1n;
  let b = mod(base, m);
  let e = exp;
  while (e > 0n) {
    if (e & 1n) result = (result * b) % m;
    b = (b * b) % m;
    e >>= 1n;
  }
  return result;
}

export function modInv(a: bigint, m: bigint): bigint {
  if (mod(a, m) === 0n) throw new Error("no inverse for zero");
  return modPow(a, m - 2n, m); // m prime
}

/** Jacobian coordinates; infinity is z === 0. */
interface Jac {
  x: bigint;
  y: bigint;
  z: bigint;
}

const INFINITY: Jac = { x: 1n, y: 1n, z: 0n };

function jacDouble(p: Jac): Jac {
  if (p.z === 0n || p.y === 0n) return INFINITY;
  const ysq = mod(p.y * p.y, P);
  const zsq = mod(p.z * p.z, P);
  const s = mod(4n * p.x * ysq, P);
  // a = -3 lets M factor as 3(x - z^2)(x + z^2)
  const m = mod(3n * (p.x - zsq) * (p.x + zsq), P);
  const x3 = mod(m * m - 2n * s, P);
  const y3 = mod(m * (s - x3) - 8n * ysq * ysq, P);
  const z3 = mod(2n * p.y * p.z, P);
  return { x: x3, y: y3, z: z3 };
}

function jacAdd(p: Jac, q: Jac): Jac {
  if (p.z === 0n) return q;
  if (q.z === 0n) return p;
  const z1sq = mod(p.z * p.z, P);
  const z2sq = mod(q.z * q.z, P);
  const u1 = mod(p.x * z2sq, P);
  const u2 = mod(q.x * z1sq, P);
  const s1 = mod(p.y * z2sq * q.z, P);
  const s2 = mod(q.y * z1sq * p.z, P);
  if (u1 === u2) {
    if (s1 !== s2) return INFINITY;
    return jacDouble(p);
  }
  const h = mod(u2 - u1, P);
  const r = mod(s2 - s1, P);
  const h2 = mod(h * h, P);
  const h3 = mod(h * h2, P);
  const u1h2 = mod(u1 * h2, P);
  const x3 = mod(r * r - h3 - 2n * u1h2, P);
  const y3 = mod(r * (u1h2 - x3) - s1 * h3, P);
  const z3 = mod(h * p.z * q.z, P);
  return { x: x3, y: y3, z: z3 };
}

export interface AffinePoint {
  x: bigint;
  y: bigint;
}

function toAffine(p: Jac): AffinePoint {
  if (p.z === 0n) throw new Error("point at infinity has no affine form");
  const zinv = modInv(p.z, P);
  const zinv2 = mod(zinv * zinv, P);
  return { x: mod(p.x * zinv2, P), y: mod(p.y * zinv2 * zinv, P) };
}

function onCurve(pt: AffinePoint): boolean {
  const lhs = mod(pt.y * pt.y, P);
  const rhs = mod(pt.x * pt.x * pt.x + A * pt.x + B, P);
  return lhs === rhs;
}

export function scalarMult(k: bigint, pt: AffinePoint): AffinePoint {
  if (mod(k, ORDER) === 0n) throw new Error("scalar multiple is the identity");
  let acc = INFINITY;
  let addend: Jac = { x: pt.x, y: pt.y, z: 1n };
  let e = mod(k, ORDER);
  while (e > 0n) {
    if (e & 1n) acc = jacAdd(acc, addend);
    addend = jacDouble(addend);
    e >>= 1n;
  }
  return toAffine(acc);
}

export const GENERATOR: AffinePoint = { x: GX, y: GY };

export function bytesToBig(bytes: Uint8Array): bigint {
  let v = 0n;
  for (const b of bytes) v = (v << 8n) | BigInt(b);
  return v;
}

export function bigToBytes(v: bigint, length: number): Uint8Array {
  const out = new Uint8Array(length);
  let x = v;
  for (let i = length - 1; i >= 0; i--) {
    out[i] = Number(x & 0xffn);
    x >>= 8n;
  }
  if (x !== 0n) throw new Error("value does not fit");
  return out;
}

export function compress(pt: AffinePoint): Uint8Array {
  const out = new Uint8Array(33);
  out[0] = pt.y & 1n ? 0x03 : 0x02;
  out.set(bigToBytes(pt.x, 32), 1);
  return out;
}

export function decompress(data: Uint8Array): AffinePoint {
  if (data.length !== 33 || (data[0] !== 0x02 && data[0] !== 0x03)) {
    throw new Error("group element must be a 33-byte compressed point");
  }
  const x = bytesToBig(data.subarray(1));
  if (x >= P) throw new Error("x out of range");
  const rhs = mod(x * x * x + A * x + B, P);
  // P === 3 (mod 4): sqrt by exponentiation
  let y = modPow(rhs, (P + 1n) / 4n, P);
  if (mod(y * y, P) !== rhs) throw new Error("not a curve point");
  if ((y & 1n) !== BigInt(data[0] & 1)) y = P - y;
  const pt = { x, y };
  if (!onCurve(pt)) throw new Error("not a curve point");
  return pt;
}

/** g^sk in compressed form. */
export function publicKey(sk: bigint): Uint8Array {
  if (sk < 1n || sk >= ORDER) throw new Error("secret key out of range");
  return compress(scalarMult(sk, GENERATOR));
}

/** element^sk, returned as the 32-byte big-endian x-coordinate (ECDH). */
export function diffieHellman(sk: bigint, element: Uint8Array): Uint8Array {
  if (sk < 1n || sk >= ORDER) throw new Error("secret key out of range");
  const shared = scalarMult(sk, decompress(element));
  return bigToBytes(shared.x, 32);
}

export function verifyKeyRelease(pk: Uint8Array, sk: bigint): boolean {
  if (sk < 1n || sk >= ORDER) return false;
  const derived = publicKey(sk);
  return derived.length === pk.length && derived.every((b, i) => b === pk[i]);
}
