/** Client-side threshold timed-release encryption, byte-compatible with
 * the server core (pinned by the shared vector file). */

import { ORDER, diffieHellman, mod, modInv, publicKey, verifyKeyRelease } from "./p256.js";
import {
  bytesToHex,
  concatBytes,
  hexToBytes,
  scalarFromHex,
  scalarToHex,
  utf8,
} from "./encoding.js";
import {
  AEAD_NONCE_BYTES,
  InvalidCiphertext,
  TAG_AEAD_NONCE,
  TAG_BALLOT_KEY,
  TAG_SHARE,
  hashToScalar,
  kdf,
  openAead,
  sealAead,
} from "./suite.js";

export const BALLOT_NONCE_BYTES = 16;
export const IDENTIFIER_BYTES = 32;

export interface SharePoint {
  x: bigint;
  y: bigint;
}

export function interpolate(points: SharePoint[], xEval: bigint, modulus: bigint = ORDER): bigint {
  if (points.length === 0) throw new Error("at least one point required");
  const xs = points.map((p) => mod(p.x, modulus));
  if (new Set(xs.map(String)).size !== xs.length) throw new Error("duplicate x coordinates");
  const at = mod(xEval, modulus);
  let total = 0n;
  for (let i = 0; i < points.length; i++) {
    let num = 1n;
    let den = 1n;
    for (let j = 0; j < xs.length; j++) {
      if (j === i) continue;
      num = mod(num * mod(at - xs[j], modulus), modulus);
      den = mod(den * mod(xs[i] - xs[j], modulus), modulus);
    }
    total = mod(total + points[i].y * num * modInv(den, modulus), modulus);
  }
  return total;
}

export interface Randomness {
  scalarNonzero(): bigint;
  scalarUniform(): bigint;
  tokenBytes(n: number): Uint8Array;
}

export class SystemRandomness implements Randomness {
  tokenBytes(n: number): Uint8Array {
    const out = new Uint8Array(n);
    globalThis.crypto.getRandomValues(out);
    return out;
  }

  scalarUniform(): bigint {
    for (;;) {
      let v = 0n;
      for (const b of this.tokenBytes(32)) v = (v << 8n) | BigInt(b);
      if (v < ORDER) return v;
    }
  }

  scalarNonzero(): bigint {
    for (;;) {
      const v = this.scalarUniform();
      if (v !== 0n) return v;
    }
  }
}

export interface BallotWire {
  ephemeral: string;
  alphas: string[];
  nonce: string;
  ciphertext: string;
}

async function shareFromDh(
  dhX: Uint8Array,
  ctx: string,
  nonce: Uint8Array,
  index: number,
): Promise<bigint> {
  const indexBytes = new Uint8Array(4);
  new DataView(indexBytes.buffer).setUint32(0, index, false);
  return hashToScalar(TAG_SHARE, dhX, utf8(ctx), nonce, indexBytes);
}

async function ballotKey(
  k: bigint,
  ctx: string,
  nonce: Uint8Array,
): Promise<{ key: Uint8Array; aeadNonce: Uint8Array }> {
  const key = await kdf(TAG_BALLOT_KEY, hexToBytes(scalarToHex(k)), utf8(ctx), nonce);
  const aeadNonce = (await kdf(TAG_AEAD_NONCE, utf8(ctx), nonce)).subarray(0, AEAD_NONCE_BYTES);
  return { key, aeadNonce };
}

export async function deriveShare(
  ephemeralHex: string,
  sk: bigint,
  index: number,
  ctx: string,
  nonceHex: string,
): Promise<bigint> {
  if (index < 1) throw new Error("holder index is 1-based");
  const dhX = diffieHellman(sk, hexToBytes(ephemeralHex));
  return shareFromDh(dhX, ctx, hexToBytes(nonceHex), index);
}

/** Seal payload || identifier against the holder set; returns the wire
 * fields.  All crypto happens locally. */
export async function encryptBallot(
  payload: Uint8Array,
  identifier: Uint8Array,
  holderPks: string[],
  t: number,
  ctx: string,
  rng: Randomness = new SystemRandomness(),
): Promise<BallotWire> {
  const n = holderPks.length;
  if (n < 1) throw new Error("holder set must not be empty");
  if (t < 1 || t > n) throw new Error("threshold must satisfy 1 <= t <= n");
  if (identifier.length !== IDENTIFIER_BYTES) throw new Error("identifier must be 32 bytes");

  const r = rng.scalarNonzero();
  const k = rng.scalarUniform();
  const nonce = rng.tokenBytes(BALLOT_NONCE_BYTES);
  const ephemeral = publicKey(r);

  const points: SharePoint[] = [{ x: 0n, y: k }];
  for (let i = 1; i <= n; i++) {
    const dhX = diffieHellman(r, hexToBytes(holderPks[i - 1]));
    points.push({ x: BigInt(i), y: await shareFromDh(dhX, ctx, nonce, i) });
  }
  const alphas: string[] = [];
  for (let j = 0; j < n - t + 1; j++) {
    alphas.push(scalarToHex(interpolate(points, BigInt(n + 1 + j))));
  }

  const { key, aeadNonce } = await ballotKey(k, ctx, nonce);
  const ciphertext = await sealAead(key, aeadNonce, concatBytes(payload, identifier));
  return {
    ephemeral: bytesToHex(ephemeral),
    alphas,
    nonce: bytesToHex(nonce),
    ciphertext: bytesToHex(ciphertext),
  };
}

export class ThresholdNotMet extends Error {}
export class InconsistentShares extends Error {}

export interface WireParams {
  ephemeral: string;
  alphas: string[];
  nonce: string;
  n: number;
  t: number;
  ctx: string;
}

export async function reconstructSecret(
  params: WireParams,
  releases: Array<{ index: number; sk: bigint }>,
  holderPks: string[],
): Promise<bigint> {
  if (holderPks.length !== params.n) throw new Error("holder key count mismatch");
  if (params.alphas.length !== params.n - params.t + 1) throw new Error("bad alpha count");

  const valid = new Map<number, bigint>();
  for (const { index, sk } of releases) {
    if (index < 1 || index > params.n || valid.has(index)) continue;
    if (verifyKeyRelease(hexToBytes(holderPks[index - 1]), sk)) valid.set(index, sk);
  }
  if (valid.size < params.t) {
    throw new ThresholdNotMet(`${valid.size} valid releases, threshold is ${params.t}`);
  }

  const shares = new Map<number, bigint>();
  for (const [index, sk] of valid) {
    shares.set(index, await deriveShare(params.ephemeral, sk, index, params.ctx, params.nonce));
  }
  const indices = [...shares.keys()].sort((a, b) => a - b);
  const chosen = indices.slice(0, params.t);
  const points: SharePoint[] = chosen.map((i) => ({ x: BigInt(i), y: shares.get(i)! }));
  params.alphas.forEach((alpha, j) => {
    points.push({ x: BigInt(params.n + 1 + j), y: scalarFromHex(alpha) });
  });
  const k = interpolate(points, 0n);

  for (const index of indices.slice(params.t)) {
    if (interpolate(points, BigInt(index)) !== shares.get(index)) {
      throw new InconsistentShares(`share from holder ${index} is off the polynomial`);
    }
  }
  return k;
}

export async function decryptBallot(
  wire: BallotWire,
  ctx: string,
  k: bigint,
): Promise<{ payload: Uint8Array; identifier: Uint8Array }> {
  const { key, aeadNonce } = await ballotKey(k, ctx, hexToBytes(wire.nonce));
  const plaintext = await openAead(key, aeadNonce, hexToBytes(wire.ciphertext));
  if (plaintext.length < IDENTIFIER_BYTES) {
    throw new InvalidCiphertext("plaintext shorter than an identifier");
  }
  return {
    payload: plaintext.subarray(0, plaintext.length - IDENTIFIER_BYTES),
    identifier: plaintext.subarray(plaintext.length - IDENTIFIER_BYTES),
  };
}
