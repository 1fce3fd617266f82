import type {
  Assessment,
  Assignment,
  Attempt,
  Book,
  ChatMessage,
  Classmate,
  Course,
  ContentItem,
  DirectMessage,
  LecturerRow,
  LoginResponse,
  Notice,
  Report,
  ResultRow,
  Submission,
  TimetableEntry,
} from './types';

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly code: string,
    message: string,
  ) {
    super(message);
    this.name = 'ApiError';
  }
}

/** Friendly banner text for the error codes the portals surface. */
const FRIENDLY: Record<string, string> = {
  denied: 'Access is denied.',
  unauthenticated: 'Your session has ended. Please log in again.',
  forbidden: 'You are not allowed to do that.',
  forbidden_room: 'You are not a member of this chat room.',
  window_closed: 'This assessment window has closed.',
  window_not_open: 'This assessment has not opened yet.',
  deadline_passed: 'The deadline has passed; your saved answers were submitted.',
  already_attempted: 'You have already taken this assessment.',
  not_enrolled: 'You are not enrolled in this course.',
  too_large: 'That file is too large to upload.',
};

export function friendlyMessage(err: unknown): string {
  if (err instanceof ApiError) {
    return FRIENDLY[err.code] ?? err.message;
  }
  return 'Something went wrong. Please try again.';
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

/**
 * Thin typed client over the Citadel JSON API. The bearer token lives in
 * memory only — a page reload means logging in again, which keeps the token
 * out of storage the API never sees.
 */
export class ApiClient {
  private token: string | null = null;
  private who: LoginResponse | null = null;

  constructor(
    private readonly baseUrl: string = '',
    private readonly fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  get session(): LoginResponse | null {
    return this.who;
  }

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const headers: Record<string, string> = {};
    if (this.token) headers['Authorization'] = `Bearer ${this.token}`;
    let payload: BodyInit | undefined;
    if (body instanceof FormData) {
      payload = body;
    } else if (body !== undefined) {
      headers['Content-Type'] = 'application/json';
      payload = JSON.stringify(body);
    }
    const response = await this.fetchFn(this.baseUrl + path, { method, headers, body: payload });
    if (!response.ok) {
      let code = 'unknown';
      let message = response.statusText || `HTTP ${response.status}`;
      try {
        const parsed = await response.json();
        code = parsed.code ?? code;
        message = parsed.message ?? message;
      } catch {
        // non-JSON error body; keep the status text
      }
      throw new ApiError(response.status, code, message);
    }
    if (response.status === 204) return undefined as T;
    return (await response.json()) as T;
  }

  // -- session ------------------------------------------------------------

  async login(username: string, password: string): Promise<LoginResponse> {
    const session = await this.request<LoginResponse>('POST', '/api/login', {
      username,
      password,
    });
    this.token = session.token;
    this.who = session;
    return session;
  }

  async logout(): Promise<void> {
    try {
      await this.request('POST', '/api/logout');
    } finally {
      this.token = null;
      this.who = null;
    }
  }

  changePassword(oldPassword: string, newPassword: string): Promise<void> {
    return this.request('POST', '/api/password', { old: oldPassword, new: newPassword });
  }

  // -- student self-service ------------------------------------------------

  myCourses(): Promise<Course[]> {
    return this.request('GET', '/api/me/courses');
  }

  myTimetable(date: string): Promise<TimetableEntry[]> {
    return this.request('GET', `/api/me/timetable?date=${encodeURIComponent(date)}`);
  }

  myResults(): Promise<ResultRow[]> {
    return this.request('GET', '/api/me/results');
  }

  myClassmates(course: string): Promise<Classmate[]> {
    return this.request('GET', `/api/me/classmates?course=${encodeURIComponent(course)}`);
  }

  myLecturers(): Promise<LecturerRow[]> {
    return this.request('GET', '/api/me/lecturers');
  }

  selfEnroll(courseCode: string): Promise<unknown> {
    return this.request('POST', '/api/me/enrollments', { course_code: courseCode });
  }

  // -- content -------------------------------------------------------------

  listCourses(): Promise<Course[]> {
    return this.request('GET', '/api/courses');
  }

  listMaterials(code: string): Promise<ContentItem[]> {
    return this.request('GET', `/api/courses/${code}/materials`);
  }

  downloadUrl(contentId: string): string {
    return `${this.baseUrl}/api/content/${contentId}/download`;
  }

  async downloadContent(contentId: string): Promise<Blob> {
    const headers: Record<string, string> = {};
    if (this.token) headers['Authorization'] = `Bearer ${this.token}`;
    const response = await this.fetchFn(this.downloadUrl(contentId), { headers });
    if (!response.ok) {
      const parsed = await response.json();
      throw new ApiError(response.status, parsed.code, parsed.message);
    }
    return response.blob();
  }

  uploadMaterial(code: string, file: File): Promise<ContentItem> {
    const form = new FormData();
    form.append('file', file);
    return this.request('POST', `/api/courses/${code}/materials`, form);
  }

  viewSyllabus(code: string): Promise<{ topics: string[] }> {
    return this.request('GET', `/api/courses/${code}/syllabus`);
  }

  setSyllabus(code: string, topics: string[]): Promise<{ topics: string[] }> {
    return this.request('PUT', `/api/courses/${code}/syllabus`, { topics });
  }

  searchLibrary(query: string): Promise<Book[]> {
    return this.request('GET', `/api/library/books?q=${encodeURIComponent(query)}`);
  }

  addBook(book: { title: string; author: string; isbn?: string; location?: string }): Promise<Book> {
    return this.request('POST', '/api/library/books', book);
  }

  // -- assessment ----------------------------------------------------------

  listAssessments(code: string): Promise<Assessment[]> {
    return this.request('GET', `/api/courses/${code}/assessments`);
  }

  createAssessment(code: string, spec: object): Promise<Assessment> {
    return this.request('POST', `/api/courses/${code}/assessments`, spec);
  }

  startAttempt(assessmentId: string): Promise<Attempt> {
    return this.request('POST', `/api/assessments/${assessmentId}/attempts`);
  }

  saveAnswers(attemptId: string, answers: Array<number | null>): Promise<Attempt> {
    return this.request('PATCH', `/api/attempts/${attemptId}/answers`, { answers });
  }

  submitAttempt(attemptId: string, answers?: Array<number | null>): Promise<Attempt> {
    return this.request(
      'POST',
      `/api/attempts/${attemptId}/submit`,
      answers === undefined ? {} : { answers },
    );
  }

  listAssignments(code: string): Promise<Assignment[]> {
    return this.request('GET', `/api/courses/${code}/assignments`);
  }

  createAssignment(code: string, spec: object): Promise<Assignment> {
    return this.request('POST', `/api/courses/${code}/assignments`, spec);
  }

  submitAssignment(assignmentId: string, content: string): Promise<Submission> {
    return this.request('POST', `/api/assignments/${assignmentId}/submissions`, { content });
  }

  gradeSubmission(submissionId: string, score: number): Promise<Submission> {
    return this.request('POST', `/api/submissions/${submissionId}/grade`, { score });
  }

  // -- collaboration -------------------------------------------------------

  listMessages(): Promise<DirectMessage[]> {
    return this.request('GET', '/api/messages');
  }

  sendMessage(toUser: string, subject: string, body: string): Promise<DirectMessage> {
    return this.request('POST', '/api/messages', { to_user: toUser, subject, body });
  }

  markRead(messageId: string): Promise<DirectMessage> {
    return this.request('POST', `/api/messages/${messageId}/read`);
  }

  listNotices(): Promise<Notice[]> {
    return this.request('GET', '/api/notices');
  }

  postNotice(scope: string, scopeRef: string | null, title: string, body: string): Promise<Notice> {
    return this.request('POST', '/api/notices', {
      scope,
      scope_ref: scopeRef,
      title,
      body,
    });
  }

  chatFetch(room: string, after: number, waitSeconds = 0): Promise<ChatMessage[]> {
    return this.request('GET', `/api/chat/${room}/messages?after=${after}&wait=${waitSeconds}`);
  }

  chatPost(room: string, body: string): Promise<ChatMessage> {
    return this.request('POST', `/api/chat/${room}/messages`, { body });
  }

  // -- reporting & registry ------------------------------------------------

  report(code: string): Promise<Report> {
    return this.request('GET', `/api/courses/${code}/report.json`);
  }

  createFaculty(name: string): Promise<{ id: string; name: string }> {
    return this.request('POST', '/api/faculties', { name });
  }

  createDepartment(name: string, facultyId: string): Promise<{ id: string; name: string }> {
    return this.request('POST', '/api/departments', { name, faculty_id: facultyId });
  }

  createUser(spec: object): Promise<{ id: string; username: string }> {
    return this.request('POST', '/api/users', spec);
  }

  createCourse(spec: object): Promise<Course> {
    return this.request('POST', '/api/courses', spec);
  }

  createEnrollment(studentId: string, courseCode: string): Promise<unknown> {
    return this.request('POST', '/api/enrollments', {
      student_id: studentId,
      course_code: courseCode,
    });
  }
}
