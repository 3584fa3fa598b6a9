/** Client-side transcript verification: replay the public log's hash
 * chain, re-derive every ballot verdict and the rule result, and diff
 * against the published transcript.  An honest gateway survives this;
 * a forged count, flipped verdict, or broken chain does not. */

import { BallotFormat, Choice, parsePayload } from "./ballots.js";
import {
  bytesToHex,
  canonicalJson,
  hexToBytes,
  scalarFromHex,
  scalarToBytes,
  utf8,
} from "./encoding.js";
import { verifyKeyRelease } from "./p256.js";
import { sha256 } from "./suite.js";
import {
  InconsistentShares,
  ThresholdNotMet,
  decryptBallot,
  reconstructSecret,
} from "./timedRelease.js";
import { InvalidCiphertext } from "./suite.js";

export interface LogEvent {
  seq: number;
  type: string;
  payload: Record<string, unknown>;
  chain: string;
}

export async function verifyChain(events: LogEvent[]): Promise<string> {
  let head = "00".repeat(32);
  for (const event of events) {
    const payload = utf8(canonicalJson(event.payload));
    const next = bytesToHex(await sha256(new Uint8Array([...hexToBytes(head), ...payload])));
    if (next !== event.chain) {
      throw new Error(`chain hash mismatch at event ${event.seq}`);
    }
    if (event.payload.type !== event.type) {
      throw new Error(`tag/type mismatch at event ${event.seq}`);
    }
    head = next;
  }
  return head;
}

interface RebuiltState {
  sessionId: string;
  fmt: BallotFormat;
  votingWindow: [number, number];
  eligibility: Set<string>;
  holders: Array<{ pk: string; release: bigint | null }>;
  ballots: Array<{
    seq: number;
    receivedAt: number;
    ephemeral: string;
    alphas: string[];
    nonce: string;
    ciphertext: string;
  }>;
  n: number;
  t: number;
}

function decimalToFraction(value: number): [bigint, bigint] {
  const text = String(value);
  if (!/^\d+(\.\d+)?$/.test(text)) throw new Error(`cannot parse fraction ${text}`);
  const [whole, frac = ""] = text.split(".");
  const den = 10n ** BigInt(frac.length);
  return [BigInt(whole) * den + BigInt(frac || "0"), den];
}

function resolveThreshold(policy: Record<string, unknown>, n: number): number {
  if (typeof policy.fixed === "number") return policy.fixed;
  const [num, den] = decimalToFraction(policy.fraction as number);
  const product = num * BigInt(n);
  return Number((product + den - 1n) / den); // ceil
}

function rebuild(events: LogEvent[]): RebuiltState {
  const genesis = events[0];
  if (!genesis || genesis.type !== "create_session") {
    throw new Error("log does not start with session creation");
  }
  const config = genesis.payload.config as Record<string, unknown>;
  const state: RebuiltState = {
    sessionId: config.session_id as string,
    fmt: config.ballot_format as BallotFormat,
    votingWindow: config.voting_window as [number, number],
    eligibility: new Set(genesis.payload.eligibility as string[]),
    holders: [],
    ballots: [],
    n: 0,
    t: 0,
  };
  for (const event of events.slice(1)) {
    const payload = event.payload;
    if (event.type === "register_holder") {
      state.holders.push({ pk: payload.pk as string, release: null });
    } else if (event.type === "freeze_holders") {
      state.n = state.holders.length;
      state.t = resolveThreshold(
        config.threshold_policy as Record<string, unknown>,
        state.n,
      );
    } else if (event.type === "submit_ballot") {
      state.ballots.push({
        seq: state.ballots.length + 1,
        receivedAt: payload.now as number,
        ephemeral: payload.ephemeral as string,
        alphas: payload.alphas as string[],
        nonce: payload.nonce as string,
        ciphertext: payload.ciphertext as string,
      });
    } else if (event.type === "release_key") {
      const index = payload.holder_index as number;
      const holder = state.holders[index - 1];
      const sk = scalarFromHex(payload.sk as string);
      if (holder.release === null && verifyKeyRelease(hexToBytes(holder.pk), sk)) {
        holder.release = sk;
      }
    }
  }
  return state;
}

interface BallotVerdict {
  seq: number;
  validity: string;
  choice: Choice | null;
  identifier: string | null;
  kCommitment: string | null;
  sharesUsed: number[] | null;
  supersededBy: number | null;
}

function renderMean(total: bigint, count: bigint): string {
  const negative = total < 0n;
  const absTotal = negative ? -total : total;
  const cents = (2n * absTotal * 100n + count) / (2n * count);
  const sign = negative && cents > 0n ? "-" : "";
  return `${sign}${cents / 100n}.${(cents % 100n).toString().padStart(2, "0")}`;
}

function applyRule(
  rule: string,
  fmt: BallotFormat,
  ballots: BallotVerdict[],
): { aggregates: Record<string, unknown>; winners: string[] } {
  if (rule === "numeric_mean" || rule === "numeric_sum") {
    const values = ballots.map((b) => b.choice as number);
    const total = values.reduce((a, v) => a + v, 0);
    const aggregates: Record<string, unknown> = { count: values.length, sum: total };
    if (rule === "numeric_mean") {
      aggregates.mean = values.length
        ? renderMean(BigInt(total), BigInt(values.length))
        : null;
    }
    return { aggregates, winners: [] };
  }
  const scores: Record<string, number> = {};
  for (const option of fmt.options ?? []) scores[option] = 0;
  for (const ballot of ballots) {
    if (rule === "plurality") {
      scores[ballot.choice as string] += 1;
    } else if (rule === "approval") {
      for (const option of ballot.choice as string[]) scores[option] += 1;
    } else if (rule === "borda") {
      const ranking = ballot.choice as string[];
      const top = (fmt.options ?? []).length - 1;
      ranking.forEach((option, position) => {
        scores[option] += top - position;
      });
    } else {
      throw new Error(`unknown rule ${rule}`);
    }
  }
  let winners: string[] = [];
  if (ballots.length > 0) {
    const best = Math.max(...Object.values(scores));
    winners = Object.keys(scores)
      .filter((o) => scores[o] === best)
      .sort();
  }
  return { aggregates: { scores }, winners };
}

async function reTally(state: RebuiltState, rule: string) {
  const releases = state.holders
    .map((holder, i) => ({ index: i + 1, sk: holder.release }))
    .filter((r): r is { index: number; sk: bigint } => r.sk !== null);
  if (state.t < 1 || releases.length < state.t) {
    throw new ThresholdNotMet(`${releases.length} valid releases, threshold is ${state.t}`);
  }
  const holderPks = state.holders.map((h) => h.pk);
  const sharesUsed = releases
    .map((r) => r.index)
    .sort((a, b) => a - b)
    .slice(0, state.t);

  const verdicts: BallotVerdict[] = [];
  for (const ballot of state.ballots) {
    const verdict: BallotVerdict = {
      seq: ballot.seq,
      validity: "auth_failure",
      choice: null,
      identifier: null,
      kCommitment: null,
      sharesUsed: null,
      supersededBy: null,
    };
    verdicts.push(verdict);
    let k: bigint;
    let payload: Uint8Array;
    let identifier: Uint8Array;
    try {
      k = await reconstructSecret(
        {
          ephemeral: ballot.ephemeral,
          alphas: ballot.alphas,
          nonce: ballot.nonce,
          n: state.n,
          t: state.t,
          ctx: state.sessionId,
        },
        releases,
        holderPks,
      );
      const opened = await decryptBallot(
        { ephemeral: ballot.ephemeral, alphas: ballot.alphas, nonce: ballot.nonce, ciphertext: ballot.ciphertext },
        state.sessionId,
        k,
      );
      payload = opened.payload;
      identifier = opened.identifier;
    } catch (err) {
      if (err instanceof InvalidCiphertext || err instanceof InconsistentShares) continue;
      throw err;
    }
    verdict.kCommitment = bytesToHex(await sha256(scalarToBytes(k)));
    verdict.sharesUsed = sharesUsed;
    verdict.identifier = bytesToHex(identifier);
    try {
      verdict.choice = parsePayload(state.fmt, payload);
    } catch {
      verdict.validity = "bad_format";
      continue;
    }
    const twice = bytesToHex(await sha256(await sha256(identifier)));
    if (!state.eligibility.has(twice)) {
      verdict.validity = "not_eligible";
      continue;
    }
    const [vOpen, vClose] = state.votingWindow;
    if (ballot.receivedAt < vOpen || ballot.receivedAt >= vClose) {
      verdict.validity = "bad_format";
      continue;
    }
    verdict.validity = "valid";
  }

  const latest = new Map<string, BallotVerdict>();
  for (const verdict of verdicts) {
    if (verdict.validity !== "valid") continue;
    const previous = latest.get(verdict.identifier!);
    if (previous) {
      previous.validity = "superseded";
      previous.supersededBy = verdict.seq;
    }
    latest.set(verdict.identifier!, verdict);
  }

  const counts: Record<string, number> = {
    valid: 0,
    bad_format: 0,
    not_eligible: 0,
    auth_failure: 0,
    superseded: 0,
  };
  for (const verdict of verdicts) counts[verdict.validity] += 1;
  const validBallots = verdicts.filter((v) => v.validity === "valid");
  const result = applyRule(rule, state.fmt, validBallots);
  return {
    verdicts,
    counts,
    result,
    releases,
    turnout: {
      distinct_valid: new Set(validBallots.map((v) => v.identifier)).size,
      eligible: state.eligibility.size,
    },
  };
}

function push(diffs: string[], field: string, mine: unknown, theirs: unknown): void {
  const a = canonicalJson(mine ?? null);
  const b = canonicalJson(theirs ?? null);
  if (a !== b) diffs.push(`${field}: log says ${a}, transcript says ${b}`);
}

/** Full independent re-derivation; returns ok plus a human-readable
 * diff naming every field that disagrees. */
export async function verifyAgainstLog(
  transcript: Record<string, unknown>,
  events: LogEvent[],
): Promise<{ ok: boolean; diffs: string[] }> {
  const diffs: string[] = [];
  let head: string;
  try {
    head = await verifyChain(events);
  } catch (err) {
    return { ok: false, diffs: [String(err)] };
  }
  let state: RebuiltState;
  let derived: Awaited<ReturnType<typeof reTally>>;
  const rule = transcript.rule as string;
  try {
    state = rebuild(events);
    derived = await reTally(state, rule);
  } catch (err) {
    return { ok: false, diffs: [`re-derivation failed: ${err}`] };
  }

  push(diffs, "session_id", state.sessionId, transcript.session_id);
  push(diffs, "n", state.n, transcript.n);
  push(diffs, "t", state.t, transcript.t);
  if (typeof transcript.chain_head === "string") {
    push(diffs, "chain_head", head, transcript.chain_head);
  }
  push(
    diffs,
    "releases_used",
    derived.releases.map((r) => r.index),
    (transcript.releases_used as Array<{ holder_index: number }>).map((r) => r.holder_index),
  );
  push(diffs, "turnout", derived.turnout, transcript.turnout);

  const theirResult = transcript.result as Record<string, unknown>;
  push(diffs, "result.aggregates", derived.result.aggregates, theirResult.aggregates);
  push(diffs, "result.winners", derived.result.winners, theirResult.winners);
  push(diffs, "result.validity_counts", derived.counts, theirResult.validity_counts);

  const theirBallots = transcript.ballots as Array<Record<string, unknown>>;
  if (theirBallots.length !== derived.verdicts.length) {
    diffs.push(
      `ballots: log has ${derived.verdicts.length}, transcript has ${theirBallots.length}`,
    );
  } else {
    derived.verdicts.forEach((mine, i) => {
      const theirs = theirBallots[i];
      push(diffs, `ballots[${i}].seq`, mine.seq, theirs.seq);
      push(diffs, `ballots[${i}].validity`, mine.validity, theirs.validity);
      push(diffs, `ballots[${i}].choice`, mine.choice, theirs.choice);
      push(diffs, `ballots[${i}].identifier`, mine.identifier, theirs.identifier);
      push(diffs, `ballots[${i}].k_commitment`, mine.kCommitment, theirs.k_commitment);
      push(diffs, `ballots[${i}].superseded_by`, mine.supersededBy, theirs.superseded_by);
      push(diffs, `ballots[${i}].shares_used`, mine.sharesUsed, theirs.shares_used);
    });
  }
  return { ok: diffs.length === 0, diffs };
}
