import { describe, expect, it } from "vitest";

import { StorageLike, VaultError, hasVault, openVault, sealVault } from "../src/vault.js";

function memoryStorage(): StorageLike {
  const map = new Map<string, string>();
  return {
    getItem: (k) => map.get(k) ?? null,
    setItem: (k, v) => void map.set(k, v),
    removeItem: (k) => void map.delete(k),
  };
}

const record = { sk: "11".repeat(32), holder_index: 3, session_id: "vault-session" };

describe("vault", () => {
  it("seals and unseals under the right passphrase", async () => {
    const storage = memoryStorage();
    await sealVault(storage, "correct horse", record);
    expect(hasVault(storage, "vault-session")).toBe(true);
    const opened = await openVault(storage, "correct horse", "vault-session");
    expect(opened).toEqual(record);
  });

  it("wrong passphrase fails locally", async () => {
    const storage = memoryStorage();
    await sealVault(storage, "correct horse", record);
    await expect(openVault(storage, "wrong", "vault-session")).rejects.toThrow(VaultError);
  });

  it("tampered vault fails integrity, nothing usable returned", async () => {
    const storage = memoryStorage();
    await sealVault(storage, "correct horse", record);
    const key = "covote/vault/vault-session";
    const blob = JSON.parse(storage.getItem(key)!);
    const sealed: string = blob.sealed;
    blob.sealed = (sealed[0] === "0" ? "1" : "0") + sealed.slice(1);
    storage.setItem(key, JSON.stringify(blob));
    await expect(openVault(storage, "correct horse", "vault-session")).rejects.toThrow(
      VaultError,
    );
  });

  it("missing vault reported distinctly", async () => {
    const storage = memoryStorage();
    expect(hasVault(storage, "vault-session")).toBe(false);
    await expect(openVault(storage, "x", "vault-session")).rejects.toThrow(
      "no vault stored",
    );
  });
});
