/** Display formatting. Amounts arrive as decimal strings from the service
 * and are formatted by string manipulation only — no float parsing, so what
 * the model produced is what the user reads. */

/** Scientific-notation reprs (sub-cent or absurdly large values) fall back
 * to fixed notation; everything at display precision stays string-only. */
export function decimalToPlain(decimal: string): string {
  if (!/[eE]/.test(decimal)) return decimal;
  return Number(decimal).toFixed(2);
}

export function formatEuro(decimal: string): string {
  let sign = "";
  let body = decimalToPlain(decimal);
  if (body.startsWith("-")) {
    sign = "-";
    body = body.slice(1);
  }
  const [intPartRaw, fracRaw = ""] = body.split(".");
  const intPart = intPartRaw.replace(/^0+(?=\d)/, "");
  const frac = fracRaw.replace(/0+$/, "");
  const grouped = intPart.replace(/\B(?=(\d{3})+(?!\d))/g, ",");
  if (frac === "") {
    return `${sign}€${grouped}`;
  }
  const cents = (frac + "00").slice(0, 2); // truncate, never round via floats
  return `${sign}€${grouped}.${cents}`;
}

export function formatPercent(probability: number): string {
  return `${(probability * 100).toFixed(1)}%`;
}
