/** Hex, scalar, and canonical-JSON encodings, byte-compatible with the
 * server core: scalars are 32-byte little-endian; JSON is sorted-key,
 * compact, UTF-8. */

import { ORDER, bytesToBig } from "./p256.js";

export function hexToBytes(hex: string): Uint8Array {
  if (hex.length % 2 !== 0 || /[^0-9a-f]/.test(hex)) throw new Error("bad hex");
  const out = new Uint8Array(hex.length / 2);
  for (let i = 0; i < out.length; i++) {
    out[i] = parseInt(hex.slice(2 * i, 2 * i + 2), 16);
  }
  return out;
}

export function bytesToHex(bytes: Uint8Array): string {
  return Array.from(bytes, (b) => b.toString(16).padStart(2, "0")).join("");
}

export function scalarToBytes(value: bigint): Uint8Array {
  if (value < 0n || value >= ORDER) throw new Error("scalar out of range");
  const out = new Uint8Array(32);
  let x = value;
  for (let i = 0; i < 32; i++) {
    out[i] = Number(x & 0xffn);
    x >>= 8n;
  }
  return out;
}

export function scalarFromBytes(bytes: Uint8Array): bigint {
  if (bytes.length !== 32) throw new Error("scalar must be exactly 32 bytes");
  let v = 0n;
  for (let i = 31; i >= 0; i--) v = (v << 8n) | BigInt(bytes[i]);
  if (v >= ORDER) throw new Error("scalar not in reduced form");
  return v;
}

export function scalarToHex(value: bigint): string {
  return bytesToHex(scalarToBytes(value));
}

export function scalarFromHex(hex: string): bigint {
  return scalarFromBytes(hexToBytes(hex));
}

export function concatBytes(...parts: Uint8Array[]): Uint8Array {
  const total = parts.reduce((sum, p) => sum + p.length, 0);
  const out = new Uint8Array(total);
  let offset = 0;
  for (const part of parts) {
    out.set(part, offset);
    offset += part.length;
  }
  return out;
}

export function utf8(text: string): Uint8Array {
  return new TextEncoder().encode(text);
}

/** Matches the server's canonical encoder: sorted keys, compact
 * separators, raw UTF-8, no trailing whitespace. */
export function canonicalJson(value: unknown): string {
  if (value === null || typeof value === "boolean") return JSON.stringify(value);
  if (typeof value === "number") {
    if (!Number.isFinite(value)) throw new Error("non-finite number");
    return JSON.stringify(value);
  }
  if (typeof value === "string") return JSON.stringify(value);
  if (Array.isArray(value)) {
    return "[" + value.map(canonicalJson).join(",") + "]";
  }
  if (typeof value === "object") {
    const entries = Object.entries(value as Record<string, unknown>)
      .sort(([a], [b]) => (a < b ? -1 : a > b ? 1 : 0));
    return (
      "{" + entries.map(([k, v]) => JSON.stringify(k) + ":" + canonicalJson(v)).join(",") + "}"
    );
  }
  throw new Error(`cannot canonicalize ${typeof value}`);
}
