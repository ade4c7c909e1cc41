// Scope grammar and the privacy ladder, mirrored from the authorization
// server's contract. Ranks are ordinal positions (1 = most protective among
// data scopes), not invented numeric risk scores.

export const DATA_SCOPES = [
  "puda:profile",
  "puda:categories:1",
  "puda:categories:2",
  "puda:categories:3",
  "puda:keywords:090",
  "puda:keywords:085",
  "puda:keywords:080",
  "puda:keywords:075",
  "puda:history:short",
  "puda:history:long",
] as const;

export type DataScope = (typeof DATA_SCOPES)[number];

export const KEYWORD_THRESHOLDS = [0.9, 0.85, 0.8, 0.75] as const;

const SCOPE_PATTERN =
  /^puda:(profile|categories:[123]|keywords:(090|085|080|075)|history:(short|long))$/;

export function isDataScope(scope: string): scope is DataScope {
  return SCOPE_PATTERN.test(scope);
}

/** Ordinal position in the protection ladder; lower = more protective. */
export function scopeRank(scope: string): number {
  const index = (DATA_SCOPES as readonly string[]).indexOf(scope);
  if (index < 0) {
    throw new Error(`not a data scope: ${scope}`);
  }
  return index + 1;
}

export function describeScope(scope: string): string {
  if (scope === "puda:profile") {
    return "Profile basics: name, age, date of birth, gender, address.";
  }
  const categories = scope.match(/^puda:categories:([123])$/);
  if (categories) {
    return `Interest categories from tier ${categories[1]} of the fixed category list (nothing outside the list can appear).`;
  }
  const keywords = scope.match(/^puda:keywords:(090|085|080|075)$/);
  if (keywords) {
    return `Browsing keywords scoring at least ${codeToThreshold(keywords[1]!).toFixed(2)}, with sentiment labels.`;
  }
  const history = scope.match(/^puda:history:(short|long)$/);
  if (history) {
    return `Detailed browsing history with ${history[1]} page summaries (URLs and titles included).`;
  }
  throw new Error(`not a data scope: ${scope}`);
}

export function scopeDataPath(scope: string): string {
  if (!isDataScope(scope)) {
    throw new Error(`not a data scope: ${scope}`);
  }
  if (scope === "puda:profile") {
    return "/data/profile";
  }
  const [, family, argument] = scope.split(":");
  return `/data/${family}/${argument}`;
}

export function thresholdToCode(threshold: number): string {
  const padded = Math.round(threshold * 100);
  const code = String(padded).padStart(3, "0");
  if (!DATA_SCOPES.includes(`puda:keywords:${code}` as DataScope)) {
    throw new Error(`no keyword scope for threshold ${threshold}`);
  }
  return code;
}

export function codeToThreshold(code: string): number {
  return Number(code) / 100;
}

/** Snap an arbitrary slider value to the nearest supported threshold. */
export function snapThreshold(value: number): number {
  let best: number = KEYWORD_THRESHOLDS[0];
  for (const threshold of KEYWORD_THRESHOLDS) {
    if (Math.abs(threshold - value) < Math.abs(best - value)) {
      best = threshold;
    }
  }
  return best;
}
