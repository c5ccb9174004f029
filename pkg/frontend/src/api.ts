// Thin typed client over the risk engine API. Any conforming server
// works, including the test stub; base URL and bearer token are
// injectable.

import type { AccountView, FlagStatus, FlagView, ProblemDocument } from './types.js';

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiUnreachable extends Error {
  constructor(cause: unknown) {
    super(`service unreachable: ${cause instanceof Error ? cause.message : String(cause)}`);
    this.name = 'ApiUnreachable';
  }
}

export class ApiConflict extends Error {
  problem: ProblemDocument;
  constructor(problem: ProblemDocument) {
    super(problem.message);
    this.name = 'ApiConflict';
    this.problem = problem;
  }
}

export class ApiError extends Error {
  status: number;
  problem: ProblemDocument;
  constructor(status: number, problem: ProblemDocument) {
    super(`${problem.code}: ${problem.message}`);
    this.name = 'ApiError';
    this.status = status;
    this.problem = problem;
  }
}

export interface ApiConfig {
  baseUrl: string;
  token?: string;
  fetchFn?: FetchLike;
}

export class ConsoleApi {
  private baseUrl: string;
  private token: string | undefined;
  private fetchFn: FetchLike;

  constructor(config: ApiConfig) {
    this.baseUrl = config.baseUrl.replace(/\/+$/, '');
    this.token = config.token;
    this.fetchFn = config.fetchFn ?? ((input, init) => fetch(input, init));
  }

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const headers: Record<string, string> = { 'Content-Type': 'application/json' };
    if (this.token) headers['Authorization'] = `Bearer ${this.token}`;
    let response: Response;
    try {
      response = await this.fetchFn(`${this.baseUrl}${path}`, { ...init, headers });
    } catch (cause) {
      throw new ApiUnreachable(cause);
    }
    if (!response.ok) {
      let problem: ProblemDocument;
      try {
        problem = (await response.json()) as ProblemDocument;
      } catch {
        problem = { code: `http_${response.status}`, message: response.statusText };
      }
      if (response.status === 409) throw new ApiConflict(problem);
      throw new ApiError(response.status, problem);
    }
    return (await response.json()) as T;
  }

  async listFlags(status?: FlagStatus): Promise<FlagView[]> {
    const query = status ? `?status=${status}` : '';
    const body = await this.request<{ flags: FlagView[] }>(`/v1/flags${query}`);
    return body.flags;
  }

  getAccount(accountId: string): Promise<AccountView> {
    return this.request<AccountView>(`/v1/accounts/${encodeURIComponent(accountId)}`);
  }

  resolveFlag(flagId: string, verdict: FlagStatus, note: string): Promise<FlagView> {
    return this.request<FlagView>(`/v1/flags/${encodeURIComponent(flagId)}/resolution`, {
      method: 'POST',
      body: JSON.stringify({ verdict, note }),
    });
  }

  health(): Promise<{ status: string }> {
    return this.request<{ status: string }>('/v1/health');
  }
}
