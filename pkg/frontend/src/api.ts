// Typed client for the vernqa HTTP API.  Plain JSON request/response,
// no streaming; the base URL is configurable.

export interface SearchHit {
  answer_id: string;
  score: number;
  text: string;
}

export interface AskResponse {
  answer: string;
  lang: string;
  hits: SearchHit[];
  disclaimer: string;
}

export interface SummarizeResponse {
  summary_sentences: string[];
  k_used: number;
}

export interface ApiError {
  error_code: string;
  message: string;
}

export class ApiRequestError extends Error {
  constructor(
    public readonly status: number,
    public readonly body: ApiError,
  ) {
    super(body.message);
  }
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchImpl: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async post<T>(path: string, body: unknown): Promise<T> {
    const response = await this.fetchImpl(`${this.baseUrl}${path}`, {
      method: 'POST',
      headers: { 'content-type': 'application/json' },
      body: JSON.stringify(body),
    });
    const data = await response.json();
    if (!response.ok) {
      throw new ApiRequestError(response.status, data as ApiError);
    }
    return data as T;
  }

  createSession(): Promise<{ session_id: string }> {
    return this.post('/v1/sessions', {});
  }

  ask(question: string, lang: string, sessionId?: string): Promise<AskResponse> {
    return this.post('/v1/ask', {
      question,
      lang,
      ...(sessionId ? { session_id: sessionId } : {}),
    });
  }

  summarize(patientId: string): Promise<SummarizeResponse> {
    return this.post('/v1/summarize', { patient_id: patientId });
  }
}
