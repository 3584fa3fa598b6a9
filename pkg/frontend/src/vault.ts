/** Passphrase-sealed local vault for the holder's one-time secret key.
 *
 * The record {sk, holder_index, session_id} is AES-GCM sealed under a
 * PBKDF2-derived key and kept in local storage; the sk leaves the
 * client only at release time, as a protocol message.  A stolen device
 * without the passphrase learns nothing, and any tampering with the
 * stored blob fails authentication before anything is transmitted.
 */

import { bytesToHex, hexToBytes, utf8 } from "./encoding.js";

const subtle = globalThis.crypto.subtle;

const PBKDF2_ITERATIONS = 100_000;

export interface StorageLike {
  getItem(key: string): string | null;
  setItem(key: string, value: string): void;
  removeItem(key: string): void;
}

export interface VaultRecord {
  sk: string; // 32-byte little-endian hex
  holder_index: number;
  session_id: string;
}

export class VaultError extends Error {}

async function deriveKey(passphrase: string, salt: Uint8Array): Promise<CryptoKey> {
  const material = await subtle.importKey("raw", utf8(passphrase) as BufferSource, "PBKDF2", false, [
    "deriveKey",
  ]);
  return subtle.deriveKey(
    { name: "PBKDF2", salt: salt as BufferSource, iterations: PBKDF2_ITERATIONS, hash: "SHA-256" },
    material,
    { name: "AES-GCM", length: 256 },
    false,
    ["encrypt", "decrypt"],
  );
}

function storageKey(sessionId: string): string {
  return `covote/vault/${sessionId}`;
}

export async function sealVault(
  storage: StorageLike,
  passphrase: string,
  record: VaultRecord,
): Promise<void> {
  const salt = globalThis.crypto.getRandomValues(new Uint8Array(16));
  const nonce = globalThis.crypto.getRandomValues(new Uint8Array(12));
  const key = await deriveKey(passphrase, salt);
  const plaintext = utf8(JSON.stringify(record));
  const ciphertext = new Uint8Array(
    await subtle.encrypt({ name: "AES-GCM", iv: nonce as BufferSource }, key, plaintext as BufferSource),
  );
  storage.setItem(
    storageKey(record.session_id),
    JSON.stringify({
      salt: bytesToHex(salt),
      nonce: bytesToHex(nonce),
      sealed: bytesToHex(ciphertext),
    }),
  );
}

export function hasVault(storage: StorageLike, sessionId: string): boolean {
  return storage.getItem(storageKey(sessionId)) !== null;
}

export async function openVault(
  storage: StorageLike,
  passphrase: string,
  sessionId: string,
): Promise<VaultRecord> {
  const raw = storage.getItem(storageKey(sessionId));
  if (raw === null) throw new VaultError("no vault stored for this session");
  let blob: { salt: string; nonce: string; sealed: string };
  try {
    blob = JSON.parse(raw);
  } catch {
    throw new VaultError("vault record is corrupted");
  }
  const key = await deriveKey(passphrase, hexToBytes(blob.salt));
  let plaintext: ArrayBuffer;
  try {
    plaintext = await subtle.decrypt(
      { name: "AES-GCM", iv: hexToBytes(blob.nonce) as BufferSource },
      key,
      hexToBytes(blob.sealed) as BufferSource,
    );
  } catch {
    throw new VaultError("wrong passphrase or tampered vault");
  }
  return JSON.parse(new TextDecoder().decode(plaintext));
}
