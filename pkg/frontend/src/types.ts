// Payload shapes as served by the Citadel HTTP API. Only the fields the
// portals actually render are declared; extra fields pass through untyped.

export type RoleName = 'Student' | 'Lecturer' | 'Registrar';

export interface LoginResponse {
  token: string;
  role: RoleName;
  user_id: string;
  username: string;
  full_name: string;
}

export interface ApiErrorBody {
  status: number;
  code: string;
  message: string;
  request_id?: string;
}

export interface Course {
  id: string;
  code: string;
  title: string;
  session: string;
  lecturer_id: string;
  syllabus: string[];
}

export interface ContentItem {
  id: string;
  owner_course: string;
  kind: string;
  filename: string;
  media_type: string;
  size_bytes: number;
  sha256: string;
}

export interface Question {
  prompt: string;
  options: string[];
  points: number;
  // correct_index is stripped for students; lecturers see it
  correct_index?: number;
}

export interface Assessment {
  id: string;
  course_code: string;
  kind: 'Quiz' | 'Exam';
  title: string;
  opens_at: string;
  closes_at: string;
  duration_limit: number | null;
  ca_weight: number;
  questions: Question[];
}

export interface Attempt {
  id: string;
  assessment_id: string;
  started_at: string;
  deadline: string;
  submitted_at: string | null;
  answers: Array<number | null>;
  auto_score: number | null;
  expired: boolean;
}

export interface Assignment {
  id: string;
  course_code: string;
  title: string;
  brief: string;
  due_at: string;
  max_score: number;
  ca_weight: number;
}

export interface Submission {
  id: string;
  assignment_id: string;
  content: string;
  score: number | null;
}

export interface ChatMessage {
  id: string;
  room: string;
  seq: number;
  sender_id: string;
  body: string;
  sent_at: string;
}

export interface DirectMessage {
  id: string;
  from_user: string;
  to_user: string;
  subject: string;
  body: string;
  sent_at: string;
  read: boolean;
}

export interface Notice {
  id: string;
  scope: string;
  title: string;
  body: string;
  posted_at: string;
}

export interface Book {
  id: string;
  title: string;
  author: string;
  isbn: string | null;
  location: string;
}

export interface TimetableEntry {
  id?: string;
  course_code: string;
  date: string;
  start: string;
  end: string;
  activity: string;
  venue: string;
}

export interface ResultRow {
  course_code: string;
  ca_score: number;
  exam_score: number;
  total: number;
  letter: string;
  grade_point: number;
}

export interface Classmate {
  full_name: string;
  matric: string;
  email: string;
  phone: string;
}

export interface LecturerRow {
  full_name: string;
  staff_id: string;
  courses: string[];
}

export interface ReportRow {
  matric: string;
  name: string;
  materials_downloaded: number;
  assignments_submitted: number;
  assignments_total: number;
  quizzes_taken: number;
  quizzes_total: number;
  ca_score: number;
  exam_score: number;
  total: number;
  letter: string;
}

export interface Report {
  course_code: string;
  generated_at: string;
  rows: ReportRow[];
}
