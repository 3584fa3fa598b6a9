/** One-click voter flows: register as secret holder, cast/overwrite a
 * ballot, release the stored key, and browse the verified result.
 *
 * Everything cryptographic runs locally; the gateway only ever sees
 * ledger-ready messages (h(I) at registration, the encrypted ballot,
 * and sk at release time).
 */

import { GatewayClient, GatewayError, NetworkUnavailable } from "./api.js";
import { BallotFormat, Choice, encodeChoice } from "./ballots.js";
import { bytesToHex, hexToBytes, scalarFromHex, scalarToHex } from "./encoding.js";
import { publicKey } from "./p256.js";
import { sha256 } from "./suite.js";
import { Randomness, SystemRandomness, encryptBallot } from "./timedRelease.js";
import { StorageLike, VaultError, hasVault, openVault, sealVault } from "./vault.js";
import { verifyAgainstLog } from "./verify.js";

export interface RegisterOutcome {
  queued: boolean;
  holderIndex?: number;
  chainHead?: string;
}

function pendingKey(sessionId: string): string {
  return `covote/pending/${sessionId}`;
}

function pushPending(storage: StorageLike, sessionId: string, message: unknown): void {
  const raw = storage.getItem(pendingKey(sessionId));
  const queue = raw ? (JSON.parse(raw) as unknown[]) : [];
  queue.push(message);
  storage.setItem(pendingKey(sessionId), JSON.stringify(queue));
}

export function pendingCount(storage: StorageLike, sessionId: string): number {
  const raw = storage.getItem(pendingKey(sessionId));
  return raw ? (JSON.parse(raw) as unknown[]).length : 0;
}

/** Generate a key pair in the client, vault the secret, submit h(I)+pk.
 * A network outage queues the registration instead of dropping it. */
export async function registerFlow(
  client: GatewayClient,
  storage: StorageLike,
  identifierHex: string,
  passphrase: string,
  rng: Randomness = new SystemRandomness(),
): Promise<RegisterOutcome> {
  const session = await client.session();
  const sessionId = session.session_id;
  const once = bytesToHex(await sha256(hexToBytes(identifierHex)));
  const sk = rng.scalarNonzero();
  const pk = bytesToHex(publicKey(sk));
  // seal before transmitting: a crash after the POST must not lose sk
  await sealVault(storage, passphrase, {
    sk: scalarToHex(sk),
    holder_index: 0,
    session_id: sessionId,
  });
  try {
    const result = await client.register(once, pk);
    await sealVault(storage, passphrase, {
      sk: scalarToHex(sk),
      holder_index: result.holder_index,
      session_id: sessionId,
    });
    return { queued: false, holderIndex: result.holder_index, chainHead: result.chain_head };
  } catch (err) {
    if (err instanceof NetworkUnavailable) {
      pushPending(storage, sessionId, { kind: "register", once_digest: once, pk });
      return { queued: true };
    }
    throw err;
  }
}

/** Re-send queued messages; stops at the first network failure. */
export async function retryPending(
  client: GatewayClient,
  storage: StorageLike,
  sessionId: string,
): Promise<number> {
  const raw = storage.getItem(pendingKey(sessionId));
  const queue = raw ? (JSON.parse(raw) as Array<Record<string, string>>) : [];
  let delivered = 0;
  while (queue.length > 0) {
    const message = queue[0];
    try {
      if (message.kind === "register") {
        await client.register(message.once_digest, message.pk);
      }
      queue.shift();
      delivered += 1;
    } catch (err) {
      if (err instanceof NetworkUnavailable) break;
      queue.shift(); // ledger rejected it; dropping is the honest outcome
    }
  }
  storage.setItem(pendingKey(sessionId), JSON.stringify(queue));
  return delivered;
}

export interface BallotOutcome {
  seq: number;
  chainHead: string;
  overwrote: boolean;
}

function lastSeqKey(sessionId: string): string {
  return `covote/last-ballot/${sessionId}`;
}

/** Fetch the frozen holder set, encrypt locally, submit; resubmission is
 * labeled as an overwrite of the previous sequence number. */
export async function ballotFlow(
  client: GatewayClient,
  storage: StorageLike,
  identifierHex: string,
  choice: Choice,
  rng: Randomness = new SystemRandomness(),
): Promise<BallotOutcome> {
  const session = await client.session();
  if (session.frozen === null) {
    throw new GatewayError("PhaseError", "holder set is not frozen yet", 409);
  }
  const fmt = session.config.ballot_format as BallotFormat;
  const payload = encodeChoice(fmt, choice); // client-side format check
  const wire = await encryptBallot(
    payload,
    hexToBytes(identifierHex),
    session.holder_pks,
    session.frozen.t,
    session.session_id,
    rng,
  );
  const result = await client.submitBallot(wire);
  const previous = storage.getItem(lastSeqKey(session.session_id));
  storage.setItem(lastSeqKey(session.session_id), String(result.seq));
  return { seq: result.seq, chainHead: result.chain_head, overwrote: previous !== null };
}

export interface ReleaseOutcome {
  valid: boolean;
  chainHead: string;
  /** deposit refund plus reward payable at settlement for a valid release */
  rewardDue: number;
}

/** Unseal the vault and submit the secret key; a wrong passphrase fails
 * locally and transmits nothing. */
export async function releaseFlow(
  client: GatewayClient,
  storage: StorageLike,
  passphrase: string,
): Promise<ReleaseOutcome> {
  const session = await client.session();
  if (!hasVault(storage, session.session_id)) {
    throw new VaultError("no vault stored for this session");
  }
  const record = await openVault(storage, passphrase, session.session_id);
  const sk = scalarFromHex(record.sk); // validates the stored encoding
  let index = record.holder_index;
  if (index < 1) {
    // registration was queued offline; recover the index from the
    // public registry by matching our own derived public key
    const pk = bytesToHex(publicKey(sk));
    const { holders } = await client.holders();
    const mine = holders.find((h) => h.pk === pk);
    if (!mine) throw new VaultError("this key is not registered as a holder");
    index = mine.index as number;
  }
  const result = await client.release(index, scalarToHex(sk));
  const deposit = (session.config.deposit as number) ?? 0;
  const reward = (session.config.reward as number) ?? 0;
  return {
    valid: result.valid,
    chainHead: result.chain_head,
    rewardDue: result.valid ? deposit + reward : 0,
  };
}

export interface ResultsView {
  available: boolean;
  phase: string;
  verified?: boolean;
  diffs?: string[];
  transcript?: Record<string, unknown>;
  chainHead: string;
}

/** Fetch the transcript and independently re-derive it from the public
 * log in the client; a mismatch is surfaced, never hidden. */
export async function resultsView(client: GatewayClient): Promise<ResultsView> {
  const session = await client.session();
  let transcript: Record<string, unknown>;
  try {
    transcript = (await client.result()).transcript;
  } catch (err) {
    if (err instanceof GatewayError && err.code === "ThresholdNotMet") {
      return { available: false, phase: session.phase, chainHead: session.chain_head };
    }
    throw err;
  }
  const log = await client.fullLog();
  const { ok, diffs } = await verifyAgainstLog(transcript, log.events);
  return {
    available: true,
    phase: session.phase,
    verified: ok,
    diffs,
    transcript,
    chainHead: log.chain_head,
  };
}
