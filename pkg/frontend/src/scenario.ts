/** Named what-if scenarios: feature values plus the last service response.
 *
 * State survives form edits until an explicit reset. At most one predict
 * request is in flight per scenario; a newer submission wins and stale
 * responses are dropped.
 */

import type { ApiClient } from "./api.js";
import { decimalToPlain } from "./format.js";
import type { CaseValues, PredictResponse } from "./types.js";

export interface Scenario {
  id: string;
  values: CaseValues;
  result: PredictResponse | null;
  pending: boolean;
}

export class ScenarioStore {
  private scenarios = new Map<string, Scenario>();
  private tokens = new Map<string, number>();
  activeId: string;

  constructor(private readonly api: ApiClient, firstId = "A") {
    this.activeId = firstId;
    this.scenarios.set(firstId, { id: firstId, values: {}, result: null, pending: false });
  }

  get(id: string): Scenario {
    const s = this.scenarios.get(id);
    if (!s) throw new Error(`unknown scenario ${id}`);
    return s;
  }

  list(): Scenario[] {
    return [...this.scenarios.values()];
  }

  active(): Scenario {
    return this.get(this.activeId);
  }

  add(id: string, copyFrom?: string): Scenario {
    if (this.scenarios.has(id)) throw new Error(`scenario ${id} already exists`);
    const base = copyFrom ? { ...this.get(copyFrom).values } : {};
    const scenario: Scenario = { id, values: base, result: null, pending: false };
    this.scenarios.set(id, scenario);
    return scenario;
  }

  setActive(id: string): void {
    this.get(id);
    this.activeId = id;
  }

  /** Edits keep the previous result visible until the next submission. */
  updateValues(id: string, values: CaseValues): void {
    this.get(id).values = { ...values };
  }

  reset(id: string): void {
    const s = this.get(id);
    s.values = {};
    s.result = null;
    s.pending = false;
    this.tokens.set(id, (this.tokens.get(id) ?? 0) + 1);
  }

  async submit(id: string, mode?: "label" | "probability"): Promise<PredictResponse | null> {
    const scenario = this.get(id);
    const token = (this.tokens.get(id) ?? 0) + 1;
    this.tokens.set(id, token);
    scenario.pending = true;
    try {
      const result = await this.api.predict(scenario.values, mode);
      if (this.tokens.get(id) !== token) return null; // superseded: latest wins
      scenario.result = result;
      return result;
    } finally {
      if (this.tokens.get(id) === token) scenario.pending = false;
    }
  }
}

export interface ScenarioDelta {
  leftId: string;
  rightId: string;
  probabilityDelta: number;
  /** Signed euro difference, computed on integer cents from the decimal
   * strings (exact; no float parsing of amounts). */
  amountDeltaCents: bigint;
  changedFeatures: string[];
}

function centsOf(decimal: string): bigint {
  let sign = 1n;
  let body = decimalToPlain(decimal);
  if (body.startsWith("-")) {
    sign = -1n;
    body = body.slice(1);
  }
  const [intPart, fracRaw = ""] = body.split(".");
  const frac = (fracRaw + "00").slice(0, 2);
  return sign * (BigInt(intPart) * 100n + BigInt(frac));
}

export function centsToEuroString(cents: bigint): string {
  const sign = cents < 0n ? "-" : "";
  const abs = cents < 0n ? -cents : cents;
  const euros = abs / 100n;
  const rem = abs % 100n;
  const fraction = rem === 0n ? "" : `.${rem.toString().padStart(2, "0")}`;
  return `${sign}${euros}${fraction}`;
}

export function scenarioDelta(left: Scenario, right: Scenario): ScenarioDelta | null {
  if (!left.result || !right.result) return null;
  const names = new Set([...Object.keys(left.values), ...Object.keys(right.values)]);
  const changed = [...names].filter((n) => left.values[n] !== right.values[n]).sort();
  return {
    leftId: left.id,
    rightId: right.id,
    probabilityDelta: right.result.grant_probability - left.result.grant_probability,
    amountDeltaCents:
      centsOf(right.result.amount_adjusted) - centsOf(left.result.amount_adjusted),
    changedFeatures: changed,
  };
}
