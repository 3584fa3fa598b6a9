/** Ballot formats and canonical plaintext encoding, mirroring the
 * server: the plaintext is the canonical JSON of the choice. */

import { canonicalJson, utf8 } from "./encoding.js";

export type BallotKind = "single_choice" | "approval" | "ranked" | "numeric";

export interface BallotFormat {
  kind: BallotKind;
  options?: string[];
  numeric_range?: [number, number];
}

export type Choice = string | string[] | number;

export class BallotFormatError extends Error {}

export function validateChoice(fmt: BallotFormat, choice: Choice): void {
  if (fmt.kind === "single_choice") {
    if (typeof choice !== "string" || !(fmt.options ?? []).includes(choice)) {
      throw new BallotFormatError(`choice must be one of ${fmt.options}`);
    }
  } else if (fmt.kind === "approval") {
    if (!Array.isArray(choice)) throw new BallotFormatError("approvals must be a list");
    const options = new Set(fmt.options ?? []);
    if (new Set(choice).size !== choice.length || !choice.every((c) => options.has(c))) {
      throw new BallotFormatError("approvals must be distinct known options");
    }
  } else if (fmt.kind === "ranked") {
    const want = [...(fmt.options ?? [])].sort();
    const got = Array.isArray(choice) ? [...choice].sort() : null;
    if (!got || JSON.stringify(got) !== JSON.stringify(want)) {
      throw new BallotFormatError("ranking must order every option exactly once");
    }
  } else {
    const [lo, hi] = fmt.numeric_range ?? [0, 0];
    if (typeof choice !== "number" || !Number.isInteger(choice) || choice < lo || choice > hi) {
      throw new BallotFormatError(`value must be an integer in [${lo}, ${hi}]`);
    }
  }
}

export function encodeChoice(fmt: BallotFormat, choice: Choice): Uint8Array {
  validateChoice(fmt, choice);
  let doc: unknown;
  if (fmt.kind === "single_choice") doc = { choice };
  else if (fmt.kind === "approval") doc = { approved: [...(choice as string[])].sort() };
  else if (fmt.kind === "ranked") doc = { ranking: choice };
  else doc = { value: choice };
  return utf8(canonicalJson(doc));
}

export function parsePayload(fmt: BallotFormat, payload: Uint8Array): Choice {
  let doc: Record<string, unknown>;
  try {
    doc = JSON.parse(new TextDecoder().decode(payload));
  } catch {
    throw new BallotFormatError("payload is not valid JSON");
  }
  const key = { single_choice: "choice", approval: "approved", ranked: "ranking", numeric: "value" }[
    fmt.kind
  ];
  const keys = Object.keys(doc);
  if (keys.length !== 1 || keys[0] !== key) {
    throw new BallotFormatError(`payload must contain exactly the ${key} field`);
  }
  const choice = doc[key] as Choice;
  validateChoice(fmt, choice);
  if (fmt.kind === "approval") {
    const values = choice as string[];
    if (JSON.stringify(values) !== JSON.stringify([...values].sort())) {
      throw new BallotFormatError("approvals must be listed in sorted order");
    }
  }
  return choice;
}
