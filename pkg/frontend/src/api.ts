/** Thin client for the suggestion service endpoints. */

import type { SuggestResponse } from "./state.js";

export interface HealthInfo {
  model: string;
  vocab_size: number;
  uptime_s: number;
}

export class ApiError extends Error {
  constructor(
    public status: number,
    public reason: string,
  ) {
    super(`service error ${status}: ${reason}`);
  }
}

export interface SuggestClient {
  suggest(
    tokens: string[],
    targetIndex: number,
    k: number,
    filterPos: boolean,
  ): Promise<SuggestResponse>;
  health(): Promise<HealthInfo>;
}

export function httpClient(base = ""): SuggestClient {
  async function parse<T>(resp: Response): Promise<T> {
    const body = await resp.json().catch(() => ({}));
    if (!resp.ok) {
      throw new ApiError(resp.status, (body as { error?: string }).error ?? "request_failed");
    }
    return body as T;
  }

  return {
    async suggest(tokens, targetIndex, k, filterPos) {
      const resp = await fetch(`${base}/api/suggest`, {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify({
          tokens,
          target_index: targetIndex,
          k,
          filter_pos: filterPos,
        }),
      });
      return parse<SuggestResponse>(resp);
    },
    async health() {
      return parse<HealthInfo>(await fetch(`${base}/api/health`));
    },
  };
}
