import { describe, expect, it } from "vitest";

import { bytesToHex, hexToBytes } from "../src/encoding.js";
import { GENERATOR, ORDER, compress, decompress, publicKey, scalarMult } from "../src/p256.js";
import {
  InconsistentShares,
  SystemRandomness,
  ThresholdNotMet,
  decryptBallot,
  deriveShare,
  encryptBallot,
  interpolate,
  reconstructSecret,
} from "../src/timedRelease.js";
import { InvalidCiphertext } from "../src/suite.js";
import { encodeChoice, parsePayload } from "../src/ballots.js";

const rng = new SystemRandomness();

function holders(count: number) {
  return Array.from({ length: count }, () => {
    const sk = rng.scalarNonzero();
    return { sk, pk: bytesToHex(publicKey(sk)) };
  });
}

describe("group layer", () => {
  it("compress/decompress round-trips", () => {
    for (const sk of [1n, 2n, 12345678901234567890n]) {
      const point = scalarMult(sk, GENERATOR);
      expect(decompress(compress(point))).toEqual(point);
    }
  });

  it("rejects off-curve and malformed encodings", () => {
    expect(() => decompress(hexToBytes("02" + "ff".repeat(32)))).toThrow();
    expect(() => decompress(hexToBytes("04" + "00".repeat(32)))).toThrow();
    expect(() => publicKey(0n)).toThrow();
    expect(() => publicKey(ORDER)).toThrow();
  });

  it("interpolates like a polynomial", () => {
    const points = [
      { x: 1n, y: 5n },
      { x: 2n, y: 5n },
      { x: 3n, y: 5n },
    ];
    expect(interpolate(points, 0n)).toBe(5n);
    expect(interpolate([{ x: 1n, y: 2n }, { x: 2n, y: 4n }], 0n)).toBe(0n);
    expect(() => interpolate([{ x: 1n, y: 1n }, { x: 1n, y: 2n }], 0n)).toThrow();
  });
});

describe("timed release", () => {
  const identifier = new Uint8Array(32).fill(7);
  const ctx = "client-test-session";
  const payload = new TextEncoder().encode('{"choice":"A"}');

  it("any 2 of 3 holders reconstruct and decrypt", async () => {
    const hs = holders(3);
    const wire = await encryptBallot(payload, identifier, hs.map((h) => h.pk), 2, ctx);
    const params = {
      ephemeral: wire.ephemeral,
      alphas: wire.alphas,
      nonce: wire.nonce,
      n: 3,
      t: 2,
      ctx,
    };
    const pks = hs.map((h) => h.pk);
    const k12 = await reconstructSecret(
      params,
      [
        { index: 1, sk: hs[0].sk },
        { index: 2, sk: hs[1].sk },
      ],
      pks,
    );
    const k23 = await reconstructSecret(
      params,
      [
        { index: 2, sk: hs[1].sk },
        { index: 3, sk: hs[2].sk },
      ],
      pks,
    );
    expect(k12).toBe(k23);
    const opened = await decryptBallot(wire, ctx, k12);
    expect(bytesToHex(opened.payload)).toBe(bytesToHex(payload));
    expect(bytesToHex(opened.identifier)).toBe(bytesToHex(identifier));
  });

  it("below threshold refuses", async () => {
    const hs = holders(3);
    const wire = await encryptBallot(payload, identifier, hs.map((h) => h.pk), 2, ctx);
    const params = { ...wire, n: 3, t: 2, ctx };
    await expect(
      reconstructSecret(params, [{ index: 1, sk: hs[0].sk }], hs.map((h) => h.pk)),
    ).rejects.toThrow(ThresholdNotMet);
  });

  it("holder-side share equals encryptor share (via reconstruction)", async () => {
    const hs = holders(2);
    const wire = await encryptBallot(payload, identifier, hs.map((h) => h.pk), 2, ctx);
    const share1 = await deriveShare(wire.ephemeral, hs[0].sk, 1, ctx, wire.nonce);
    const share2 = await deriveShare(wire.ephemeral, hs[1].sk, 2, ctx, wire.nonce);
    const k = interpolate(
      [
        { x: 1n, y: share1 },
        { x: 2n, y: share2 },
        { x: 3n, y: BigInt("0x" + swap(wire.alphas[0])) },
      ],
      0n,
    );
    const opened = await decryptBallot(wire, ctx, k);
    expect(bytesToHex(opened.payload)).toBe(bytesToHex(payload));
  });

  it("tampered alphas are detected", async () => {
    const hs = holders(3);
    const wire = await encryptBallot(payload, identifier, hs.map((h) => h.pk), 2, ctx);
    const alphas = [...wire.alphas];
    const first = hexToBytes(alphas[0]);
    first[0] ^= 1;
    alphas[0] = bytesToHex(first);
    const params = { ephemeral: wire.ephemeral, alphas, nonce: wire.nonce, n: 3, t: 2, ctx };
    const releases = hs.map((h, i) => ({ index: i + 1, sk: h.sk }));
    await expect(reconstructSecret(params, releases, hs.map((h) => h.pk))).rejects.toThrow(
      InconsistentShares,
    );
  });

  it("tampered ciphertext fails authentication", async () => {
    const hs = holders(2);
    const wire = await encryptBallot(payload, identifier, hs.map((h) => h.pk), 2, ctx);
    const params = { ...wire, n: 2, t: 2, ctx };
    const k = await reconstructSecret(
      params,
      hs.map((h, i) => ({ index: i + 1, sk: h.sk })),
      hs.map((h) => h.pk),
    );
    const ct = hexToBytes(wire.ciphertext);
    ct[3] ^= 0x10;
    await expect(
      decryptBallot({ ...wire, ciphertext: bytesToHex(ct) }, ctx, k),
    ).rejects.toThrow(InvalidCiphertext);
  });
});

describe("ballot encoding", () => {
  it("round-trips choices canonically", () => {
    const fmt = { kind: "single_choice" as const, options: ["A", "B"] };
    const payload = encodeChoice(fmt, "B");
    expect(new TextDecoder().decode(payload)).toBe('{"choice":"B"}');
    expect(parsePayload(fmt, payload)).toBe("B");
    expect(() => encodeChoice(fmt, "Z")).toThrow();
  });
});

/** little-endian hex -> big-endian hex for bigint parsing */
function swap(leHex: string): string {
  const bytes = hexToBytes(leHex);
  bytes.reverse();
  return bytesToHex(bytes);
}
