export * from "./api.js";
export * from "./ballots.js";
export * from "./encoding.js";
export * from "./flows.js";
export * from "./p256.js";
export * from "./suite.js";
export * from "./timedRelease.js";
export * from "./vault.js";
export * from "./verify.js";
