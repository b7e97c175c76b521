// Typed client for the /v1 assessment API. All state lives server-side;
// this module only moves JSON and never derives scores.

export interface EmotionSample {
  valence: number;
  arousal: number;
  confidence: number;
}

export interface UserAccount {
  username: string;
  token: string;
  education_level: number;
  job_level: number;
}

export interface SessionSummary {
  session_id: string;
  username: string;
  state: string;
  answered: number;
  total_questions: number;
  revalidations_used: number;
  revalidations_remaining: number;
}

export interface QuestionView {
  question_id: string;
  text: string;
  qtype: string;
  index: number;
  answered: number;
  total_questions: number;
  revalidations_used: number;
  revalidations_remaining: number;
}

export interface TransitionView {
  state: string;
  answered: number;
  total_questions: number;
  revalidations_used: number;
  revalidations_remaining: number;
  latency_ms: number;
  granted: string;
  flagged: boolean;
  completed: boolean;
}

export interface SkipView {
  state: string;
  revalidations_used: number;
  revalidations_remaining: number;
  replacement_question_id: string | null;
}

export interface ResultView {
  risk_profile: {
    primary: string;
    secondary: string;
    label: string;
    coefficient: number;
    bin_counts: Record<string, number>;
  };
  truthfulness: number;
  risk_tolerance: number;
  avg_latency_ms: number;
  thinking_type: { band: string; coefficient: number; unusual: boolean };
  leadership: number;
  biometric_type: { category: number; label: string };
  confidence: number;
  worthiness_raw: number;
  worthiness_pct: number;
}

export class ApiError extends Error {
  constructor(
    public status: number,
    public code: string,
    detail: string,
  ) {
    super(detail);
  }
}

type FetchLike = typeof fetch;

export class ApiClient {
  private token: string | null = null;

  constructor(
    private baseUrl: string = "",
    private fetchImpl: FetchLike = (...args) => fetch(...args),
  ) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const headers: Record<string, string> = { "Content-Type": "application/json" };
    if (this.token !== null) headers["Authorization"] = `Bearer ${this.token}`;
    const response = await this.fetchImpl(`${this.baseUrl}${path}`, {
      method,
      headers,
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    const text = await response.text();
    if (!response.ok) {
      let code = "http_error";
      let detail = text;
      try {
        const parsed = JSON.parse(text);
        code = parsed.code ?? code;
        detail = parsed.detail ?? text;
      } catch {
        // non-JSON error body; keep raw text
      }
      throw new ApiError(response.status, code, detail);
    }
    return (text ? JSON.parse(text) : undefined) as T;
  }

  async createUser(username: string, education: number, job: number): Promise<UserAccount> {
    const account = await this.request<UserAccount>("POST", "/v1/users", {
      username,
      education_level: education,
      job_level: job,
    });
    this.token = account.token;
    return account;
  }

  startSession(username: string, nonce?: string): Promise<SessionSummary> {
    return this.request("POST", "/v1/sessions", { username, nonce });
  }

  getQuestion(sessionId: string): Promise<QuestionView> {
    return this.request("GET", `/v1/sessions/${sessionId}/question`);
  }

  submitAnswer(
    sessionId: string,
    answer: "Yes" | "No",
    displayedAt: number,
    answeredAt: number,
    emotion: EmotionSample,
  ): Promise<TransitionView> {
    return this.request("POST", `/v1/sessions/${sessionId}/answer`, {
      answer,
      displayed_at: Math.round(displayedAt),
      answered_at: Math.round(answeredAt),
      emotion,
    });
  }

  skip(sessionId: string): Promise<SkipView> {
    return this.request("POST", `/v1/sessions/${sessionId}/skip`);
  }

  getResult(sessionId: string): Promise<ResultView> {
    return this.request("GET", `/v1/sessions/${sessionId}/result`);
  }

  async getQrText(sessionId: string): Promise<string> {
    const headers: Record<string, string> = {};
    if (this.token !== null) headers["Authorization"] = `Bearer ${this.token}`;
    const response = await this.fetchImpl(`${this.baseUrl}/v1/sessions/${sessionId}/qr`, {
      headers,
    });
    if (!response.ok) throw new ApiError(response.status, "http_error", await response.text());
    return response.text();
  }
}
