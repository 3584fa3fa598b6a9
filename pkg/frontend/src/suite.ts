/** Hash suite mirror: plain digest, tagged hash-to-scalar, KDF, AES-GCM.
 * SHA-256 and AES-GCM come from WebCrypto; multi-part inputs carry
 * 4-byte big-endian length frames exactly like the server. */

import { ORDER, bytesToBig, mod } from "./p256.js";
import { concatBytes, utf8 } from "./encoding.js";

const subtle = globalThis.crypto.subtle;

export const TAG_SHARE = utf8("covote/share/v1");
export const TAG_BALLOT_KEY = utf8("covote/ballot-key/v1");
export const TAG_AEAD_NONCE = utf8("covote/aead-nonce/v1");

export const AEAD_NONCE_BYTES = 12;

export async function sha256(data: Uint8Array): Promise<Uint8Array> {
  return new Uint8Array(await subtle.digest("SHA-256", data as BufferSource));
}

export function frame(parts: Uint8Array[]): Uint8Array {
  const pieces: Uint8Array[] = [];
  for (const part of parts) {
    const len = new Uint8Array(4);
    new DataView(len.buffer).setUint32(0, part.length, false);
    pieces.push(len, part);
  }
  return concatBytes(...pieces);
}

async function tagged(tag: Uint8Array, counter: number, payload: Uint8Array): Promise<Uint8Array> {
  return sha256(concatBytes(tag, new Uint8Array([counter]), payload));
}

/** Two counter-separated blocks reduced mod the group order. */
export async function hashToScalar(tag: Uint8Array, ...parts: Uint8Array[]): Promise<bigint> {
  const payload = frame(parts);
  const wide = concatBytes(await tagged(tag, 0, payload), await tagged(tag, 1, payload));
  return mod(bytesToBig(wide), ORDER);
}

export async function kdf(tag: Uint8Array, ...parts: Uint8Array[]): Promise<Uint8Array> {
  return tagged(tag, 0, frame(parts));
}

export class InvalidCiphertext extends Error {}

export async function sealAead(
  key: Uint8Array,
  nonce: Uint8Array,
  plaintext: Uint8Array,
): Promise<Uint8Array> {
  const k = await subtle.importKey("raw", key as BufferSource, "AES-GCM", false, ["encrypt"]);
  const ct = await subtle.encrypt({ name: "AES-GCM", iv: nonce as BufferSource }, k, plaintext as BufferSource);
  return new Uint8Array(ct);
}

export async function openAead(
  key: Uint8Array,
  nonce: Uint8Array,
  ciphertext: Uint8Array,
): Promise<Uint8Array> {
  const k = await subtle.importKey("raw", key as BufferSource, "AES-GCM", false, ["decrypt"]);
  try {
    const pt = await subtle.decrypt({ name: "AES-GCM", iv: nonce as BufferSource }, k, ciphertext as BufferSource);
    return new Uint8Array(pt);
  } catch {
    throw new InvalidCiphertext("authenticated decryption failed");
  }
}
